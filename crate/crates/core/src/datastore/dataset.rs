use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, DenseMatrix, RngStream};

pub const DATASET_MAGIC: &[u8; 4] = b"DPAL";
pub const DATASET_VERSION: u32 = 1;
const HEADER_LEN: usize = 20;
/// Rows whose norm differs from 1 by more than this are rejected on load.
pub const LOAD_NORM_TOLERANCE: f64 = 1e-3;

/// Frozen embeddings, hidden labels, and one anchor embedding per class.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    features: DenseMatrix,
    labels: Vec<u32>,
    anchors: DenseMatrix,
    class_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonTail {
    class_names: Vec<String>,
}

/// Header fields of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub num_samples: u32,
    pub dim: u32,
    pub num_classes: u32,
}

impl FeatureDataset {
    /// Validates shapes and label ranges, then renormalizes rows.
    pub fn new(
        mut features: DenseMatrix,
        labels: Vec<u32>,
        mut anchors: DenseMatrix,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d, c) = (features.rows(), features.cols(), anchors.rows());
        if c < 2 || d < 2 || n < c {
            return Err(Error::InvalidConfig(format!(
                "need N >= C >= 2 and D >= 2, got N={n} C={c} D={d}"
            )));
        }
        if anchors.cols() != d {
            return Err(Error::Shape(format!(
                "anchors have {} dims, features {d}",
                anchors.cols()
            )));
        }
        if labels.len() != n {
            return Err(Error::Shape(format!(
                "{} labels for {n} samples",
                labels.len()
            )));
        }
        if class_names.len() != c {
            return Err(Error::Shape(format!(
                "{} class names for {c} classes",
                class_names.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= c) {
            return Err(Error::Format(format!("label {bad} outside [0, {c})")));
        }
        check_norms("features", &features)?;
        check_norms("anchors", &anchors)?;
        features.normalize_rows()?;
        anchors.normalize_rows()?;
        Ok(Self {
            features,
            labels,
            anchors,
            class_names,
        })
    }

    pub fn num_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.anchors.rows()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &[f32] {
        self.features.row(i)
    }

    pub fn anchors(&self) -> &DenseMatrix {
        &self.anchors
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Ground truth. Only the annotation oracle and evaluation code read this.
    pub(crate) fn true_label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    /// Ground truth for a set of indices, for evaluation and diagnostics.
    pub fn labels_for_evaluation(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.true_label(i)).collect()
    }

    /// Fraction of `indices` whose nearest anchor (cosine) is the true class.
    pub fn nearest_anchor_accuracy(&self, indices: &[usize]) -> f64 {
        if indices.is_empty() {
            return 0.0;
        }
        let hits = indices
            .iter()
            .filter(|&&i| self.nearest_anchor(i) == self.true_label(i))
            .count();
        hits as f64 / indices.len() as f64
    }

    pub fn nearest_anchor(&self, i: usize) -> usize {
        let x = self.feature(i);
        let sims: Vec<f64> = self
            .anchors
            .iter_rows()
            .map(|a| numerics::dot(x, a))
            .collect();
        numerics::argmax(&sims)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (n, d, c) = (self.num_samples(), self.dim(), self.num_classes());
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * (n * d + n + c * d) + 64);
        out.extend_from_slice(DATASET_MAGIC);
        for v in [DATASET_VERSION, n as u32, d as u32, c as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.features.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.labels {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.anchors.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let tail = JsonTail {
            class_names: self.class_names.clone(),
        };
        out.extend_from_slice(&serde_json::to_vec(&tail).expect("class names serialize"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = parse_header(bytes)?;
        let (n, d, c) = (
            header.num_samples as usize,
            header.dim as usize,
            header.num_classes as usize,
        );
        let payload = n
            .checked_mul(d)
            .and_then(|nd| c.checked_mul(d).map(|cd| nd + cd + n))
            .and_then(|words| words.checked_mul(4))
            .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
        if bytes.len() < HEADER_LEN + payload {
            return Err(Error::Format(format!(
                "payload truncated: need {} bytes, have {}",
                HEADER_LEN + payload,
                bytes.len()
            )));
        }
        let mut cursor = HEADER_LEN;
        let mut words = |count: usize| {
            let slice = &bytes[cursor..cursor + 4 * count];
            cursor += 4 * count;
            slice
                .chunks_exact(4)
                .map(|w| [w[0], w[1], w[2], w[3]])
                .collect::<Vec<_>>()
        };
        let features: Vec<f32> = words(n * d).into_iter().map(f32::from_le_bytes).collect();
        let labels: Vec<u32> = words(n).into_iter().map(u32::from_le_bytes).collect();
        let anchors: Vec<f32> = words(c * d).into_iter().map(f32::from_le_bytes).collect();
        let tail: JsonTail = serde_json::from_slice(&bytes[cursor..])
            .map_err(|e| Error::Format(format!("class-name tail: {e}")))?;

        let features = DenseMatrix::from_vec(n, d, features)
            .map_err(|e| Error::Format(format!("features: {e}")))?;
        let anchors = DenseMatrix::from_vec(c, d, anchors)
            .map_err(|e| Error::Format(format!("anchors: {e}")))?;
        Self::new(features, labels, anchors, tail.class_names).map_err(|e| match e {
            Error::InvalidConfig(m) | Error::Shape(m) => Error::Format(m),
            other => other,
        })
    }
}

fn check_norms(what: &'static str, m: &DenseMatrix) -> Result<()> {
    for (row, r) in m.iter_rows().enumerate() {
        let norm = numerics::norm(r);
        if (norm - 1.0).abs() > LOAD_NORM_TOLERANCE {
            return Err(Error::Norm { what, row, norm });
        }
    }
    Ok(())
}

pub fn parse_header(bytes: &[u8]) -> Result<DatasetHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != DATASET_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let header = DatasetHeader {
        version: word(0),
        num_samples: word(1),
        dim: word(2),
        num_classes: word(3),
    };
    if header.version != DATASET_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {}",
            header.version
        )));
    }
    Ok(header)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<FeatureDataset> {
    FeatureDataset::from_bytes(&fs::read(path)?)
}

pub fn save_dataset(dataset: &FeatureDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset.to_bytes())?;
    Ok(())
}

/// Parameters of the synthetic Gaussian-on-the-sphere family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_per_class: usize,
    pub num_classes: usize,
    pub dim: usize,
    /// Signal-to-noise of samples around their class mean; noise norm is about `1 / class_sep`.
    pub class_sep: f64,
    /// Norm scale of the perturbation applied to each anchor.
    pub anchor_noise: f64,
}

/// Class means are random unit directions. Each sample is
/// `normalize(mean + N(0, I / (class_sep^2 D)))` and each anchor is
/// `normalize(mean + anchor_noise * N(0, I / D))`.
pub fn generate_synthetic(spec: &SyntheticSpec, rng: &RngStream) -> Result<FeatureDataset> {
    let SyntheticSpec {
        n_per_class,
        num_classes: c,
        dim: d,
        class_sep,
        anchor_noise,
    } = *spec;
    if n_per_class == 0 || c < 2 || d < 2 {
        return Err(Error::InvalidConfig(format!(
            "n_per_class={n_per_class} num_classes={c} dim={d}"
        )));
    }
    if !(class_sep > 0.0) || !class_sep.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "class_sep must be positive, got {class_sep}"
        )));
    }
    if !(anchor_noise >= 0.0) || !anchor_noise.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "anchor_noise must be >= 0, got {anchor_noise}"
        )));
    }

    let unit_noise = 1.0 / (d as f64).sqrt();
    let gaussian = |rng: &mut RngStream, scale: f64| -> Vec<f64> {
        (0..d).map(|_| rng.normal() * scale).collect()
    };

    let mut mean_rng = rng.child("means");
    let mut means = Vec::with_capacity(c);
    while means.len() < c {
        let v = gaussian(&mut mean_rng, 1.0);
        if let Ok(u) = numerics::l2_normalize(&v) {
            means.push(u);
        }
    }

    let mut anchor_rng = rng.child("anchors");
    let mut anchors = Vec::with_capacity(c);
    for mean in &means {
        let noise = gaussian(&mut anchor_rng, anchor_noise * unit_noise);
        let v: Vec<f64> = mean.iter().zip(&noise).map(|(m, e)| m + e).collect();
        let u = numerics::l2_normalize(&v).unwrap_or_else(|_| mean.clone());
        anchors.push(u.into_iter().map(|x| x as f32).collect::<Vec<f32>>());
    }

    let mut sample_rng = rng.child("samples");
    let sample_scale = unit_noise / class_sep;
    let mut features = Vec::with_capacity(n_per_class * c);
    let mut labels = Vec::with_capacity(n_per_class * c);
    for (k, mean) in means.iter().enumerate() {
        let mut made = 0;
        while made < n_per_class {
            let noise = gaussian(&mut sample_rng, sample_scale);
            let v: Vec<f64> = mean.iter().zip(&noise).map(|(m, e)| m + e).collect();
            if let Ok(u) = numerics::l2_normalize(&v) {
                features.push(u.into_iter().map(|x| x as f32).collect::<Vec<f32>>());
                labels.push(k as u32);
                made += 1;
            }
        }
    }

    FeatureDataset::new(
        DenseMatrix::from_rows(&features)?,
        labels,
        DenseMatrix::from_rows(&anchors)?,
        (0..c).map(|k| format!("class_{k}")).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            n_per_class: 25,
            num_classes: 4,
            dim: 16,
            class_sep: 1.5,
            anchor_noise: 0.5,
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let ds = generate_synthetic(&spec(), &RngStream::new(1)).unwrap();
        let bytes = ds.to_bytes();
        let back = FeatureDataset::from_bytes(&bytes).unwrap();
        assert_eq!(back.num_samples(), 100);
        assert_eq!(back.dim(), 16);
        assert_eq!(back.num_classes(), 4);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn header_layout() {
        let ds = generate_synthetic(&spec(), &RngStream::new(1)).unwrap();
        let bytes = ds.to_bytes();
        assert_eq!(&bytes[..4], b"DPAL");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 100);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 16);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 4);
        let tail_start = 20 + 4 * (100 * 16 + 100 + 4 * 16);
        let tail: serde_json::Value = serde_json::from_slice(&bytes[tail_start..]).unwrap();
        assert_eq!(tail["class_names"][3], "class_3");
    }

    #[test]
    fn truncated_and_corrupt_files_fail() {
        let ds = generate_synthetic(&spec(), &RngStream::new(1)).unwrap();
        let bytes = ds.to_bytes();
        assert!(matches!(
            FeatureDataset::from_bytes(&bytes[..500]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            FeatureDataset::from_bytes(&bytes[..10]),
            Err(Error::Format(_))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            FeatureDataset::from_bytes(&bad),
            Err(Error::Format(_))
        ));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(
            FeatureDataset::from_bytes(&bad),
            Err(Error::Format(_))
        ));
        let mut bad = bytes;
        let label_pos = 20 + 4 * 100 * 16;
        bad[label_pos..label_pos + 4].copy_from_slice(&9u32.to_le_bytes());
        assert!(matches!(
            FeatureDataset::from_bytes(&bad),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn zero_row_is_a_norm_error() {
        let ds = generate_synthetic(&spec(), &RngStream::new(1)).unwrap();
        let mut bytes = ds.to_bytes();
        for b in &mut bytes[20..20 + 4 * 16] {
            *b = 0;
        }
        assert!(matches!(
            FeatureDataset::from_bytes(&bytes),
            Err(Error::Norm {
                what: "features",
                row: 0,
                ..
            })
        ));
    }

    #[test]
    fn slightly_off_rows_are_renormalized() {
        let f = DenseMatrix::from_rows(&[vec![1.0005, 0.0], vec![0.0, 0.9995]]).unwrap();
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let ds = FeatureDataset::new(f, vec![0, 1], a, vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(ds.feature(0), &[1.0, 0.0]);
        assert_eq!(ds.feature(1), &[0.0, 1.0]);
    }

    #[test]
    fn generator_invariants() {
        let ds = generate_synthetic(&spec(), &RngStream::new(4)).unwrap();
        for row in ds.features().iter_rows().chain(ds.anchors().iter_rows()) {
            assert!((numerics::norm(row) - 1.0).abs() < 1e-5);
        }
        let again = generate_synthetic(&spec(), &RngStream::new(4)).unwrap();
        assert_eq!(ds.to_bytes(), again.to_bytes());
        let other = generate_synthetic(&spec(), &RngStream::new(5)).unwrap();
        assert_ne!(ds.to_bytes(), other.to_bytes());
    }

    #[test]
    fn noiseless_anchors_are_class_means() {
        let mut s = spec();
        s.anchor_noise = 0.0;
        s.n_per_class = 400;
        let ds = generate_synthetic(&s, &RngStream::new(2)).unwrap();
        // Sample means converge to the anchors for symmetric noise.
        for k in 0..4 {
            let mut mean = vec![0.0f64; 16];
            for i in (0..ds.num_samples()).filter(|&i| ds.true_label(i) == k) {
                for (m, x) in mean.iter_mut().zip(ds.feature(i)) {
                    *m += f64::from(*x);
                }
            }
            let sim = numerics::cosine_sim(
                &mean,
                &ds.anchors()
                    .row(k)
                    .iter()
                    .map(|&x| f64::from(x))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            assert!(sim > 0.99, "class {k}: {sim}");
        }
    }

    #[test]
    fn well_separated_classes_are_easy() {
        let s = SyntheticSpec {
            n_per_class: 100,
            num_classes: 4,
            dim: 16,
            class_sep: 20.0,
            anchor_noise: 0.0,
        };
        let ds = generate_synthetic(&s, &RngStream::new(8)).unwrap();
        let all: Vec<usize> = (0..ds.num_samples()).collect();
        assert_eq!(ds.nearest_anchor_accuracy(&all), 1.0);
    }

    #[test]
    fn invalid_synthetic_configs() {
        let rng = RngStream::new(0);
        for bad in [
            SyntheticSpec {
                n_per_class: 0,
                ..spec()
            },
            SyntheticSpec {
                num_classes: 1,
                ..spec()
            },
            SyntheticSpec { dim: 1, ..spec() },
            SyntheticSpec {
                class_sep: 0.0,
                ..spec()
            },
            SyntheticSpec {
                anchor_noise: -1.0,
                ..spec()
            },
        ] {
            assert!(matches!(
                generate_synthetic(&bad, &rng),
                Err(Error::InvalidConfig(_))
            ));
        }
    }
}
