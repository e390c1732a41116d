"""Batch plotting scripts for the simulator's CSV bundles.

One module per figure kind, each a standalone CLI:

    fig-decay            fig2_decay.csv       population + coherence
    fig-trial-heatmap    fig3_trials.csv      ensemble relaxation map
    fig-distance-stats   fig4_stats.csv       T1 vs JJ proximity
    fig-coupling-scatter fig4_stats.csv       Delta0 vs p.E anatomy
    fig-convergence      fig4_convergence.csv T1 vs retained count
    fig-sweep-heatmap    fig5_sweep.csv       dipole x t1_min map
    fig-threshold-band   fig5_threshold.csv   onset threshold band

All follow `<script> --in <csv> --out <image>`.
"""

__version__ = "0.1.0"
