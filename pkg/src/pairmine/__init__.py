"""pairmine: similarity- and translation-based sentence pair mining,
KL-targeted mining-parameter tuning, a self-hosted annotation service,
and dataset diagnostics.
"""

__version__ = "0.1.0"
