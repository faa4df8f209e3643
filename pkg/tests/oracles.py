"""Independent high-precision reference values built directly from the
defining series and products with mpmath."""

import mpmath as mp

mp.mp.dps = 40


def poch_inf(a, q, n=4000):
    out = mp.mpf(1)
    a, q = mp.mpf(a), mp.mpf(q)
    qi = mp.mpf(1)
    for _ in range(n):
        term = a * qi
        if abs(term) < mp.mpf(10) ** -45:
            break
        out *= 1 - term
        qi *= q
    return out


def poch_real(a, alpha, q):
    return poch_inf(a, q) / poch_inf(mp.mpf(a) * mp.mpf(q) ** alpha, q)


def q_gamma(x, q):
    return mp.qgamma(x, q)


def q_number(alpha, q):
    q = mp.mpf(q)
    return -mp.expm1(alpha * mp.log(q)) / (1 - q)


def lattice_sum(fn, lo, hi):
    """sum_{k=lo}^{hi} fn(k) in extended precision."""
    return mp.fsum(fn(k) for k in range(lo, hi + 1))


def jackson(f, x, q, n=3000):
    q, x = mp.mpf(q), mp.mpf(x)
    return (1 - q) * x * lattice_sum(lambda k: q ** k * f(x * q ** k), 0, n)


def hardy_functional(f, p, alpha, q, lo, hi, unit=False):
    """(1-q)^(p+1) sum_j q^(j(p(alpha-1)+1)) (sum_{i>=j} q^(i(1-alpha)) f(q^i))^p
    with every lattice sum restricted to ``lo <= i <= hi``."""
    q, p, alpha = mp.mpf(q), mp.mpf(p), mp.mpf(alpha)
    w = {i: q ** (i * (1 - alpha)) * f(q ** i) for i in range(lo, hi + 1)}
    total = mp.mpf(0)
    s = mp.mpf(0)
    for j in range(hi, lo - 1, -1):
        s += w[j]
        if unit and j < 0:
            break
        if s > 0:
            total += q ** (j * (p * (alpha - 1) + 1)) * s ** p
    return (1 - q) ** (p + 1) * total


def rl_functional(f, p, alpha, q, lo, hi, unit=False):
    """sum over x=q^j of (1-q) x (I^alpha f(x)/x^alpha)^p with the kernel
    (q^(m+1);q)_(alpha-1) formed directly as a product ratio."""
    q, p, alpha = mp.mpf(q), mp.mpf(p), mp.mpf(alpha)
    n = hi - lo + 1
    c = [poch_real(q ** (m + 1), alpha - 1, q) for m in range(n)]
    v = {i: q ** i * f(q ** i) for i in range(lo, hi + 1)}
    g = q_gamma(alpha, q)
    total = mp.mpf(0)
    for j in range(lo, hi + 1):
        if unit and j < 0:
            continue
        t = mp.fsum(c[m] * v[j + m] for m in range(hi - j + 1))
        total += (1 - q) * q ** j * ((1 - q) / g * q ** (-j) * t) ** p
    return total


def pnorm(f, p, q, lo, hi):
    q = mp.mpf(q)
    return (1 - q) * mp.fsum(q ** k * f(q ** k) ** p for k in range(lo, hi + 1)
                             if f(q ** k) != 0)


def hardy_functional_dense(values, k0, p, alpha, q, pad_lo, unit=False):
    """Double precision double sum for a function equal to ``values[i]`` at
    ``t = q^(k0+i)`` and zero at other lattice points; the outer sum runs
    ``pad_lo`` steps below the window."""
    import math

    n = len(values)
    total = []
    for j in range(k0 - pad_lo, k0 + n):
        if unit and j < 0:
            continue
        s = math.fsum(q ** (i * (1 - alpha)) * values[i - k0]
                      for i in range(max(j, k0), k0 + n))
        if s > 0:
            total.append(q ** (j * (p * (alpha - 1) + 1)) * s ** p)
    return (1 - q) ** (p + 1) * math.fsum(total)
