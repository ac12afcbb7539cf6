"""Shifted divisor correlations: exact sums, main terms and error analysis."""
