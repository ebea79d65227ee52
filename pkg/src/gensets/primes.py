"""
Deterministic Miller-Rabin and next-prime stepping for prime moduli N.
The fixed witness set makes the test exact below PRIME_CAP.
"""

import math

from . import config as cfg
from .errors import ResourceCapError


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    for p in cfg.MILLER_RABIN_BASES:
        if n % p == 0:
            return n == p
    if n >= cfg.PRIME_CAP:
        raise ResourceCapError("primality is certified only below {}, got {}".format(cfg.PRIME_CAP, n))
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in cfg.MILLER_RABIN_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime_at_least(x: float) -> int:
    """Smallest prime >= ceil(x)."""
    if x > cfg.PRIME_CAP:
        raise ResourceCapError("next_prime_at_least is limited to x <= {}, got {}".format(cfg.PRIME_CAP, x))
    n = max(2, int(math.ceil(x)))
    if n <= 3:
        return n
    if n % 2 == 0:
        n += 1
    while not is_prime(n):
        n += 2
    return n
