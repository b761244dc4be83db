"""mechamp: two-cavity optomechanics with a parametrically amplified mechanical mode.

Simulates photon blockade, Wigner-function negativity and the Gaussian /
Langevin analytics of the amplified-coupling scheme from first principles.
"""

__version__ = "0.1.0"
