"""Infinitary term rewriting over rational terms."""

from .terms import (
    ArityError,
    PositionError,
    Signature,
    Symbol,
    Term,
    TermError,
    TermGraph,
    TermSyntaxError,
    UnguardedBinderError,
    apply_substitution,
    bisimilar,
    canonicalize,
    distance,
    format_position,
    metric,
    parse_position,
    parse_term,
    print_term,
    subterm_at,
    truncated_bisimilar,
)
from .trs import (
    TRS,
    ReplayError,
    RewriteStep,
    Rule,
    RuleError,
    StepError,
    find_redexes,
    has_finite_lhs,
    is_left_linear,
    is_normal_form,
    match_root,
    parse_trs,
    replay,
    root_step,
    step_at,
)
from .certificate import (
    Certificate,
    CertificateFormatError,
    Id,
    IdStep,
    InvalidCertificate,
    Lift,
    LiftRef,
    Mode,
    Root,
    RootRev,
    Split,
    Verdict,
    check_certificate,
    dump_certificate,
    endpoints,
    nesting_depth,
    parse_certificate,
)
from .fixpoint import (
    Relation,
    Universe,
    check_post_fixed_point,
    close_universe,
    extract_certificate,
    gfp_relation,
    lfp_ired,
    lift_relation,
    parse_universe,
    root_step_relation,
    rtc_relation,
)
from .compression import (
    CompressedPrefix,
    CompressionError,
    InfiniteLhs,
    NonLeftLinear,
    compress_prefix,
    pattern_depth,
)

__version__ = "0.1.0"
