"""Variable names of the formulation models.

Variables are named after the decision symbols they hold, keyed by stage:
``o`` for the pre-contingency stage, ``i,<k>`` for the intermediate stage of
contingency ``k`` and ``c,<k>`` for its post-RAS stage::

    pg[o,3]  th[i,7,12]  pd[c,7,4]  zg[c,7,22]  dlt[c,7]
    z1[ras1,7,23]  y[ras1,7]  zgj[ras1,22]  r[5]  dpg[ras1]
"""

from typing import Optional

from ras_scopf.core.network import Contingency

PRE = "o"
INTERMEDIATE = "i"
POST_RAS = "c"


def stage_key(stage: str, contingency: Optional[Contingency] = None) -> str:
    return stage if contingency is None else f"{stage},{contingency.name}"


def pg_name(key: str, gen_id: int) -> str:
    return f"pg[{key},{gen_id}]"


def th_name(key: str, bus_id: int) -> str:
    return f"th[{key},{bus_id}]"


def pd_name(key: str, bus_id: int) -> str:
    return f"pd[{key},{bus_id}]"


def zg_name(key: str, gen_id: int) -> str:
    return f"zg[{key},{gen_id}]"


def dlt_name(key: str) -> str:
    return f"dlt[{key}]"


def trigger_name(which: str, scheme: str, contingency: Contingency, line_id: int) -> str:
    return f"{which}[{scheme},{contingency.name},{line_id}]"


def y_name(scheme: str, contingency: Contingency) -> str:
    return f"y[{scheme},{contingency.name}]"


def zgj_name(scheme: str, gen_id: int) -> str:
    return f"zgj[{scheme},{gen_id}]"


def r_name(gen_id: int) -> str:
    return f"r[{gen_id}]"


def dpg_name(scheme: str) -> str:
    return f"dpg[{scheme}]"
