"""How fast does a Markov chain forget, and what does that cost a learner?

Builds a few two-state chains, computes their exact mixing coefficients
phi_d for indicator losses, and fits geometric/algebraic decay laws to the
resulting tables.
"""

import numpy as np

from mixgame import exact_phi, fit_mixing_profile, phi_table, two_state_chain

losses = np.array([[0.0, 1.0], [1.0, 0.0]])  # hypothesis w bets on state w

print("phi_d for indicator losses on two-state chains\n")
print("  d   p=q=0.25     p=q=0.05     p=0.1,q=0.3")
for d in range(1, 11):
    row = [exact_phi(two_state_chain(p, q), losses, d)
           for p, q in ((0.25, 0.25), (0.05, 0.05), (0.1, 0.3))]
    print(f" {d:2d}   {row[0]:.6f}     {row[1]:.6f}     {row[2]:.6f}")

# The p=q=0.25 column is exactly 0.5 * 0.5^d: the chain's second
# eigenvalue is 1 - p - q = 0.5 and the indicator loss exposes it fully.
print("\nclosed form check, d=5:", 0.5 * 0.5**5)

# Fitting a decay law to the table recovers the eigenvalue time constant.
table = phi_table(two_state_chain(0.05, 0.05), losses, 20)
prof = fit_mixing_profile(table, "geometric")
print(f"\ngeometric fit for p=q=0.05: C={prof.C:.4f}, tau={prof.tau:.4f} "
      f"(eigenvalue time constant -1/ln(0.9) = {-1/np.log(0.9):.4f})")
print(f"fit residual: {prof.fit_residual:.2e}")
