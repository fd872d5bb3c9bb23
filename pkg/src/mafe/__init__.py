"""Multi-authority attribute-based inner-product functional encryption.

Independent authorities issue short preimage key shares bound to a user
identifier and a key vector; a ciphertext tagged with an authority set
decrypts, under any covering share set, to the inner product of its
plaintext with the key vector - approximately in noisy mode, exactly in
the modulus-switched mode.  Supporting primitives (exact Z_q arithmetic,
discrete Gaussian sampling, the gadget matrix, lattice trapdoors, and a
hash-to-Gaussian oracle) live in their own modules.
"""

from .errors import (
    ArtifactError,
    DimensionError,
    MafeError,
    ModulusMismatchError,
    ParameterError,
    PolicyError,
    ShareMismatchError,
    WidthError,
)
from .gadget import (
    GadgetShape,
    gadget_apply,
    gadget_decompose,
    gadget_gaussian_preimage,
    mod_switch_down,
    mod_switch_up,
)
from .game import (
    AdmissibilityReport,
    GameSetup,
    QueryRecord,
    QueryType,
    Transcript,
    check_admissible,
    classify_query,
    run_honest_game,
)
from .gauss import GaussParam, build_cdt, sample_z, sample_z_vector
from .oracle import GlobalId, OracleConfig, encode_oracle_input, hash_to_gaussian
from .rng import RngState
from .scheme import (
    AuthorityKeyPair,
    AuthorityPublicKey,
    Ciphertext,
    FunctionalKeyShare,
    GlobalParams,
    auth_setup,
    compute_b0,
    decrypt,
    encrypt,
    global_setup,
    inner_gap_centered,
    inner_product_mod,
    keygen,
    noise_bound,
    verify_share,
)
from .serial import MasterSecret, deserialize, read_artifact, serialize, write_artifact
from .trapdoor import TrapMatrix, Trapdoor, min_preimage_width, sample_pre, trap_gen
from .zq import Modulus, SignedVector, ZqMatrix, ZqVector, center, inner_product, mat_mul, vec_mat_mul

__version__ = "0.1.0"
