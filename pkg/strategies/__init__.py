# Rate strategies: cutset bound, amplify-and-forward, combining references
from strategies.cutset import awgn_capacity, cutset, parallel_channels_rate
from strategies.amplify_forward import af_rate, af_mrc_comparison, max_gains
from strategies.combining import direct_rate, mrc_rate

__all__ = [
    'awgn_capacity', 'cutset', 'parallel_channels_rate',
    'af_rate', 'af_mrc_comparison', 'max_gains',
    'direct_rate', 'mrc_rate',
]
