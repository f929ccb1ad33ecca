"""Independent reference values for the test suite."""


def _times_one_minus_power(series, k):
    # series * (1 - q^k), truncated to the same length
    return [c - (series[n - k] if n >= k else 0) for n, c in enumerate(series)]


def eta_product_level_11(precision):
    """Coefficients a_0 .. a_precision of q prod_{n >= 1} (1 - q^n)^2 (1 - q^(11n))^2."""
    series = [0] * (precision + 1)
    if precision >= 1:
        series[1] = 1
    for n in range(1, precision + 1):
        series = _times_one_minus_power(series, n)
        series = _times_one_minus_power(series, n)
        if 11 * n <= precision:
            series = _times_one_minus_power(series, 11 * n)
            series = _times_one_minus_power(series, 11 * n)
    return series
