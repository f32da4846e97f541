/// Counter-based random stream.
///
/// Output `i` is a pure function of `(seed, stream, i)`, so identical keys
/// yield identical sequences on every platform. Children are keyed by the
/// parent's `(seed, stream)` and a label, never by the parent's counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self {
            seed,
            stream,
            counter: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Derives an independent stream named by `label`.
    pub fn child(&self, label: &str) -> Self {
        self.child_indexed(label, 0)
    }

    /// Derives an independent stream named by `label` and `index`.
    pub fn child_indexed(&self, label: &str, index: u64) -> Self {
        let key = mix64(self.stream ^ mix64(fnv1a(label.as_bytes()).wrapping_add(GOLDEN)));
        Self::with_stream(
            self.seed,
            mix64(key ^ mix64(index.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D)),
        )
    }

    pub fn next_u64(&mut self) -> u64 {
        let key =
            mix64(self.seed ^ 0x2545_F491_4F6C_DD1D) ^ mix64(self.stream.wrapping_add(GOLDEN));
        let out = mix64(key.wrapping_add(self.counter.wrapping_add(1).wrapping_mul(GOLDEN)));
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`, unbiased. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Standard normal draw (Box-Muller, one output per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn take(rng: &mut RngStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| rng.next_u64()).collect()
    }

    #[test]
    fn same_key_same_sequence() {
        let mut a = RngStream::with_stream(42, 7);
        let mut b = RngStream::with_stream(42, 7);
        assert_eq!(take(&mut a, 64), take(&mut b, 64));
        let mut c = RngStream::with_stream(42, 8);
        assert_ne!(take(&mut a, 8), take(&mut c, 8));
    }

    #[test]
    fn frozen_reference_values() {
        // First SplitMix64 output from state 0.
        assert_eq!(mix64(GOLDEN), 0xE220_A839_7B1D_CDAF);
        // Recomputed outside Rust from the same definition; pinned so that
        // any change to the stream layout is noticed.
        let mut r = RngStream::new(0);
        assert_eq!(r.next_u64(), 0xC893_4486_29A0_E4C9);
        assert_eq!(r.next_u64(), 0xA89D_BB1C_F375_9F05);
        assert_eq!(r.next_u64(), 0xD067_F877_B5CF_A2BD);
        assert_eq!(RngStream::new(42).next_u64(), 0x6D71_AE6B_4D54_9746);
    }

    #[test]
    fn children_ignore_parent_draws() {
        let parent = RngStream::new(9);
        let mut used = parent.clone();
        take(&mut used, 100);
        assert_eq!(parent.child("init"), used.child("init"));
        assert_ne!(parent.child("init"), parent.child("train"));
        assert_ne!(
            parent.child_indexed("round", 0),
            parent.child_indexed("round", 1)
        );
        assert_eq!(parent.child("init").counter(), 0);
    }

    #[test]
    fn uniform_and_normal_moments() {
        let mut r = RngStream::new(3);
        let n = 200_000;
        let us: Vec<f64> = (0..n).map(|_| r.next_f64()).collect();
        let mean = us.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 5e-3);
        assert!(us.iter().all(|&u| (0.0..1.0).contains(&u)));

        let zs: Vec<f64> = (0..n).map(|_| r.normal()).collect();
        let m = zs.iter().sum::<f64>() / n as f64;
        let v = zs.iter().map(|z| (z - m) * (z - m)).sum::<f64>() / n as f64;
        assert!(m.abs() < 1e-2);
        assert!((v - 1.0).abs() < 2e-2);
    }

    #[test]
    fn below_covers_range() {
        let mut r = RngStream::new(5);
        let mut counts = [0usize; 6];
        for _ in 0..60_000 {
            counts[r.index(6)] += 1;
        }
        assert!(counts.iter().all(|&c| (9_000..11_000).contains(&c)));
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut r = RngStream::new(11);
        let mut xs: Vec<usize> = (0..50).collect();
        r.shuffle(&mut xs);
        let mut sorted = xs.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(xs, sorted);
    }
}
