from ras_scopf.experiments.cli import main

raise SystemExit(main())
