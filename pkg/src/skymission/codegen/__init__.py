from .dot import gen_dot
from .flightscript import (
    FlightScript,
    FlightScriptError,
    check_flightscript,
    gen_flightscript,
    load_flightscript,
)

__all__ = ["FlightScript", "FlightScriptError", "check_flightscript", "gen_dot", "gen_flightscript",
           "load_flightscript"]
