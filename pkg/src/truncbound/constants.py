"""Numerical tolerances shared across modules (all absolute)."""

TOL_ROW = 1e-9
TOL_ENTRY = 1e-12
TOL_SOLVE = 1e-10
TOL_PROB = 1e-9
TOL_STAT = 1e-9
PIVOT_MIN = 1e-12
NEG_CLAMP = -1e-12
MAX_TERMS = 10**6
# Row-sum deficits this small are float noise from summing entries that
# should total exactly 1; they are snapped to zero.
DEFECT_SNAP = 1e-14
SCHEMA_VERSION = 1
