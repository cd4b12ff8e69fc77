"""Pinned sign, orientation and branch conventions.

Every choice below is fixed once by the circle-bundle oracle (holonomy
e^{2 pi i theta} must produce an alpha pairing of exactly theta) and is used
consistently across the whole package.  Reports snapshot this table so that
numbers can be interpreted without reading the code.
"""

CONVENTIONS = {
    "holonomy": "holonomy_j = exp(+X_j) for a constant connection form omega = sum_j X_j dx_j",
    "log_branch": "matrix logs take eigenvalue angles in [0, 1) turns, i.e. arguments in [0, 2*pi)",
    "cs_path": "paths run from nabla_0 to nabla_1; d cs = ch(nabla_1) - ch(nabla_0)",
    "cs_flat": "cs(nabla_1, nabla_0) = sum_k (-1)^k k!/((2*pi*i)^{k+1} (2k+1)!) tau(alpha^{2k+1}), alpha = omega_1 - omega_0",
    "cs_path_coefficient": "1/(k! (2*pi*i)^{k+1}) tau(alphadot wedge F_t^k); fixed by the transgression identity",
    "even_cs": "even transgression integrates over t in [0, 1] with coefficient (-1)^k k!/((2k)! (2*pi*i)^{k+1})",
    "alpha": "alpha(flat, trivial) = odd cycle pairings of cs(flat, trivial); circle oracle gives alpha = theta",
    "eigenvalue_angles": "alpha for rank-n holonomy sums per-eigenvalue angles in [0, 1); totals reported raw and mod 1",
    "crossed_action": "the group generator acts on functions by right translation; g u g^{-1} = e^{2 pi i theta} u",
    "free_product_automorphism": "phi_u fixes the base algebra and sends z -> z u (right multiplication); phi_u o phi_v = phi_{uv}",
    "witness_frame": "bundle endomorphisms live in the holonomy-twisted frame whose exterior derivative carries the weight derivation",
    "witness_intertwiner": "T is the entrywise conjugate of the inclusion unitary, constant in the twisted frame",
}

# Canonical-form threshold: stored coefficients below this magnitude are dropped.
COEFF_DROP = 1e-14
