use attnae::autoencoder::{backward, forward, AutoencoderConfig, AutoencoderParams, MaskedRatings, ModelInputs, Slot};
use attnae::numeric::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub inputs: ModelInputs,
    pub cells: MaskedRatings,
    pub params: AutoencoderParams,
    pub cfg: AutoencoderConfig,
}

/// Small random problem; feature rows are drawn from a few patterns so that
/// several entities share a group.
pub fn instance(seed: u64, attention: bool, affine: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=8);
    let m = rng.random_range(2..=6);
    let d = rng.random_range(2..=4);
    let df = rng.random_range(2..=4);
    let mut entries = Vec::new();
    for r in 0..n {
        for c in 0..m {
            if rng.random::<f64>() < 0.5 {
                entries.push((r, c, rng.random_range(1..=5) as f64));
            }
        }
    }
    if entries.is_empty() {
        entries.push((0, 0, 3.0));
    }
    let cells = MaskedRatings { rows: n, cols: m, entries };
    let patterns: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..df).map(|_| if rng.random::<f64>() < 0.5 { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut fdata = Vec::new();
    for _ in 0..n {
        fdata.extend(&patterns[rng.random_range(0..3)]);
    }
    let features = Matrix::from_vec(n, df, fdata).unwrap();
    let cfg = AutoencoderConfig {
        latent_dim: d,
        attention_enabled: attention,
        layernorm_affine: affine,
        ..AutoencoderConfig::default()
    };
    let mut params = AutoencoderParams::init(m, df, &cfg, &mut rng);
    // Move α away from 1/2 and the affine terms away from identity.
    params.tensors[Slot::AlphaRaw as usize].value = Matrix::row_vector(&[rng.random_range(-1.5..1.5)]);
    for slot in [Slot::NormGain, Slot::NormBias] {
        let t = &mut params.tensors[slot as usize].value;
        for v in t.as_mut_slice() {
            *v += rng.random_range(-0.5..0.5);
        }
    }
    let inputs = ModelInputs::new(cells.dense(), features).unwrap();
    Instance { inputs, cells, params, cfg }
}

pub fn loss_and_grad(inst: &Instance, values: &[Matrix]) -> (f64, Vec<Matrix>) {
    let p = inst.params.with_values(values);
    let pass = forward(&inst.inputs, &p, &inst.cfg, &inst.cells, None).unwrap();
    backward(&inst.inputs, &p, &inst.cfg, &inst.cells, &pass).unwrap()
}

