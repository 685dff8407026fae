"""Central listing of every numeric tolerance used by the library and its
acceptance checks.  Experiment reports echo this table so that any result can
be traced to the exact thresholds in force when it was produced."""

import math

TOLERANCES: dict[str, float] = {
    # exact-arithmetic identities (mass bookkeeping, reassociation slack)
    "mass_identity": 1e-12,
    "probability_mass": 1e-12,
    "reassociation": 1e-12,
    # measure_core
    "energy_rescale": 1e-10,
    "thicken_mass_rel": 0.02,
    "frostman_dyadic_bound": 4.0 * math.pi,
    "mattila_frostman_factor": 4.0,
    "riesz_sup_factor": 2.0,
    # circle_kernel
    "j0_abs": 1e-10,
    "mollifier_norm_rel": 1e-10,
    "kernel_identity_abs": 1e-8,
    "branch_moduli_abs": 1e-10,
    "u_map_block_abs": 1e-12,
    "sigma_hat_decay_sup": 6.39,
    "k_hat_decay_const": 2.0 * math.pi + 0.1,
    "sigma_eps_mass_rel": 1e-6,
    "sigma_eps_rotation_abs": 1e-8,
    "degeneracy_clamp": 1e-12,
    # bilinear
    "bilinear_mass_abs": 1e-6,
    "bilinearity_rel": 1e-10,
    "plane_wave_abs": 1e-6,
    "mollify_contract_abs": 1e-8,
    "sobolev_parseval_rel": 1e-10,
    "sobolev_refine_rel": 0.01,
    "bilinear_oracle_rel": 1e-2,
    "ratio_stability_max": 3.0,
    # trilinear
    "pruned_vs_brute_abs": 1e-12,
    "config_mass_rel": 1e-9,
    "rigid_motion_abs": 1e-12,
    "domination_constant_max": 1e3,
    # discrete_geom
    "adaptability_s": 1.76,
    "adaptability_cap": 50.0,
    "corollary_slope_max": 9.0 / 7.0 + 0.15,
    "bridge_factor": 8.0,
    # sharpness_lab
    "sharpness_slope_lo": 2.8,
    "sharpness_slope_hi": 3.2,
    "sharpness_slope_dim2_min": 3.3,
    "sharpness_slope_lowdim_max": 2.85,
    "pair_exponent_tol": 0.2,
    "distance_flat_abs": 0.1,
    "distance_blowup_max": -0.1,
}
