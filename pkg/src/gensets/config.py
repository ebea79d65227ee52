"""
Defaults for the generated-set least-squares library.
Every function that takes one of these as an optional argument falls back to the value here.
"""

# Linear algebra
RANK_TOL = 1e-10  # singular values below RANK_TOL * sigma_max count as zero
NORMAL_EQUATION_TOL = 1e-9  # relative defect allowed in Phi* Phi c = Phi* b

# Zeta / mu(lambda)
ZETA_TOL = 1e-12  # absolute accuracy of the Euler-Maclaurin zeta evaluation
ZETA_MIN_TERMS = 16
ZETA_MAX_TERMS = 1_000_000

# Hyperbolic cross
CROSS_CARDINALITY_CAP = 10_000_000  # enumerate_cross refuses larger predicted sets
TAIL_LAMBDA_GRID = 24  # lambda values tried when minimizing analytic tail remainders

# Point sets
NODE_PRECISION_K_MAX = 1_000_000  # node error < 1e-14 guaranteed up to this k

# Divisor constant
C_EPS_DEFAULT_N_MAX = 4096

# Primality
PRIME_CAP = 2 ** 62  # deterministic Miller-Rabin range
MILLER_RABIN_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

# Probabilistic checks
MC_MIN_TRIALS = 100
MC_DEFAULT_TRIALS = 100_000
MC_BLOCK = 4096  # zeta draws per vectorized block
EXHAUSTIVE_CAP = 10_000_000  # N^d limit for exhaustive rational averaging
STD_ERROR_BAND = 3.0  # closed form must lie within this many standard errors
VERIFY_SYSTEMS = 10  # random systems in the verify moment checks
VERIFY_CROSS_INSTANCES = 20  # random weighted crosses checked against a box scan

# Generator search
SEARCH_MAX_TRIALS = 100

# Experiments
DEFAULT_EPS = 0.5
J_RADIUS_MULT = 50.0  # surrogate J = cross(J_RADIUS_MULT * M)
J_INDEX_CAP = 200_000
M_RULE = "mbound"  # or "scaling"
M_SCALE = 1.0  # c in m = floor(c * n^((1-eps)/(1+r*eps))) for the scaling rule
WORKERS = 4

# Output
CSV_FLOAT_FORMAT = "%.17g"
CSV_LINE_TERMINATOR = "\n"

# Worst-case error
WCE_DENSE_MAX = 2000  # |J| above this switches to an iterative largest-singular-value solve
WCE_BLOCK = 2048  # tail columns assembled per block
ACCEPT_RTOL = 1e-10  # relative slack in the two acceptance comparisons
