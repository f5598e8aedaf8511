//! Inputs shared by the benchmarks.

use psc_core::psc::OffsetPrecision;
use psc_core::tokenizer::tokenize;
use psc_core::{reverse_log, shapes, simplify, CollapseLog, PenaltyConfig, Psc, SimplicialComplex, Stop, VirtualEdges};

pub fn full_log(c: &SimplicialComplex) -> CollapseLog {
    simplify(c, &PenaltyConfig::default(), VirtualEdges::Delaunay, Stop::Full).expect("simplify").1
}

pub fn quantized_psc(c: &SimplicialComplex) -> Psc {
    reverse_log(&full_log(c), OffsetPrecision::Binary16).expect("reverse")
}

/// Base token streams for the first `count` corpus meshes.
pub fn token_corpus(count: usize) -> Vec<Vec<u32>> {
    shapes::corpus(count, 7).iter().map(|(_, c)| tokenize(&quantized_psc(c)).expect("tokenize")).collect()
}
