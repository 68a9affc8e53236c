use std::io::Write;

use super::csv_error;
use crate::coder::encode_sequence_logged;
use crate::datapipe::{Modality, CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::predictors::Predictor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    /// 1-based byte position within the chunk.
    pub position: usize,
    /// Cumulative code bits up to `position` over `8 * position`, in
    /// percent, averaged over the sequences.
    pub mean_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InContextCurve {
    pub sequences: usize,
    pub points: Vec<CurvePoint>,
}

impl InContextCurve {
    pub fn rate_at(&self, position: usize) -> Option<f64> {
        self.points.get(position.checked_sub(1)?).map(|p| p.mean_rate)
    }
}

/// Averages, over the first `sample_count` full-length chunks of `bytes`,
/// the cumulative rate at every position. Code lengths are those of the
/// quantized conditionals the coder used.
pub fn in_context_curve(
    predictor: &mut dyn Predictor,
    bytes: &[u8],
    modality: Modality,
    sample_count: usize,
) -> Result<InContextCurve> {
    let chunks: Vec<&[u8]> = bytes.chunks_exact(CHUNK_SIZE).collect();
    if sample_count == 0 || chunks.len() < sample_count {
        return Err(Error::InsufficientData(format!(
            "curve needs {sample_count} chunks of {CHUNK_SIZE} bytes, dataset has {}",
            chunks.len()
        )));
    }
    let mut sums = vec![0.0f64; CHUNK_SIZE];
    for chunk in &chunks[..sample_count] {
        let (symbols, _) = super::predictor_input(predictor, chunk, modality)?;
        let (_, lengths) = encode_sequence_logged(predictor, &symbols)?;
        // Lost bits are not attributable to positions; the curve tracks the
        // model's code lengths only.
        let mut cumulative = 0.0;
        for (i, &bits) in lengths.iter().enumerate() {
            cumulative += bits;
            sums[i] += 100.0 * cumulative / (8.0 * (i + 1) as f64);
        }
    }
    let points = sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| CurvePoint {
            position: i + 1,
            mean_rate: s / sample_count as f64,
        })
        .collect();
    Ok(InContextCurve {
        sequences: sample_count,
        points,
    })
}

/// `position,mean_rate,sequences`, one row per position.
pub fn curve_to_csv(curve: &InContextCurve, out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["position", "mean_rate", "sequences"])
        .map_err(csv_error)?;
    for p in &curve.points {
        writer
            .write_record([
                p.position.to_string(),
                format!("{:.6}", p.mean_rate),
                curve.sequences.to_string(),
            ])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}
