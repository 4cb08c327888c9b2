"""Desk-scale random coding: codebooks, typical projectors, SRM decoding, experiments."""

from covertmac.codingsim.codebook import (
    Codebook,
    DimensionCapError,
    SimParams,
    codebook_rng,
    encode_joint_state,
    generate_codebook,
    message_count,
    warden_state,
)
from covertmac.codingsim.decoder import DecoderPovm, build_srm_decoder, exact_error, srm
from covertmac.codingsim.experiments import (
    SimReport,
    covertness_report,
    packing_experiment,
    rate_thresholds,
    resolvability_experiment,
)
from covertmac.codingsim.lemmas import LemmaReport, lemma_checks
from covertmac.codingsim.typical import band_projector, cond_typical_projector, typical_projector

__all__ = [
    "Codebook",
    "DecoderPovm",
    "DimensionCapError",
    "LemmaReport",
    "SimParams",
    "SimReport",
    "band_projector",
    "build_srm_decoder",
    "codebook_rng",
    "cond_typical_projector",
    "covertness_report",
    "encode_joint_state",
    "exact_error",
    "generate_codebook",
    "lemma_checks",
    "message_count",
    "packing_experiment",
    "rate_thresholds",
    "resolvability_experiment",
    "srm",
    "typical_projector",
    "warden_state",
]
