"""Monte Carlo engine, figure-data generators, verification suite and CLI."""
from .figures import (
    Table,
    find_k_for_half_loss,
    generate_fig_cdf,
    generate_fig_find_k,
    generate_fig_mean_vs_k,
    generate_fig_pfa,
    generate_fig_snrloss,
    write_table,
)
from .montecarlo import (
    EmpiricalDistribution,
    RunConfig,
    empirical_cdf_at,
    ks_distance,
    map_blocks,
    run_monte_carlo,
    stream_for,
)
from .verify import VerifyConfig, VerifyReport, verify_suite
