"""
Finite-alphabet divergences and the binary KL inverse
=====================================================

A quick tour of the exact information-theoretic primitives: KL and Renyi
divergences, mutual information, and the numerically inverted binary KL with
its closed-form cap a + sqrt(2ab) + 2b.
"""

import numpy as np

from genbounds import (
    binary_kl,
    binary_kl_inverse,
    binary_kl_inverse_cap,
    kl_divergence,
    mutual_information,
    renyi_divergence,
)

# Two coins: a fair one and a biased one.
p = np.array([0.5, 0.5])
q = np.array([0.25, 0.75])
print(f"D_KL(fair || biased)     = {kl_divergence(p, q):.6f} nats")
print(f"D_2  (fair || biased)    = {renyi_divergence(p, q, 2.0):.6f} nats")

# The Renyi family approaches the KL divergence as the order tends to 1.
for alpha in (0.5, 1.001, 2.0, 4.0):
    print(f"  order {alpha:>5}: {renyi_divergence(p, q, alpha):.6f}")

# Mutual information of a noisy channel observed through a joint table.
joint = np.array([[0.4, 0.1], [0.1, 0.4]])
print(f"\nI(S;W) of a noisy bit    = {mutual_information(joint):.6f} nats")

# The binary KL inverse: the largest plausible true risk p such that
# D(p || a) stays within a budget b. The Tolstikhin-style cap bounds it in
# closed form, which is what turns the inverse into a fast-rate bound.
a, b = 0.1, 0.05
p_star = binary_kl_inverse(a, b)
print(f"\nbinary_kl_inverse({a}, {b}) = {p_star:.6f}")
print(f"check: D({p_star:.4f} || {a}) = {binary_kl(p_star, a):.6f} (target {b})")
print(f"closed-form cap            = {binary_kl_inverse_cap(a, b):.6f}")
