"""guardml: hybrid homomorphic encryption toolkit and protocol simulator.

Subpackages and modules:

- ``field``    exact arithmetic over Z_p, p = 2^16 + 1
- ``ske``      HE-friendly symmetric stream cipher (keystream over Z_p)
- ``bfv``      exact BFV homomorphic encryption with batching
- ``hhe``      the five-algorithm hybrid suite (keygen/enc/decomp/eval/dec)
- ``envelope`` signed, timestamped protocol messages
- ``protocol`` 2-party and 3-party inference protocol state machines
- ``mlquant``  signal quantization and integer linear-model inference
- ``bench``    timing/size measurement and report files
- ``cli``      the ``guardml`` command line front end
"""

__version__ = "0.1.0"
