from .buchi import BuchiAutomaton, Guard, Release, accepts, ltl_to_buchi, nnf
from .smv import export_smv, smv_name
from .check import Verdict, VerificationReport, check, check_all, report_from_records

__all__ = [
    "BuchiAutomaton", "Guard", "Release", "accepts", "ltl_to_buchi", "nnf",
    "Verdict", "VerificationReport", "check", "check_all", "report_from_records", "export_smv", "smv_name",
]
