#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OCCUPATIONS: [&str; 4] = ["engineer", "student", "writer", "other"];
const GENRES: [&str; 19] = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime", "Documentary", "Drama",
    "Fantasy", "Film-Noir", "Horror", "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
];

/// Synthetic dataset in the MovieLens 100K layout with the full entity
/// counts but only a few thousand ratings in fold u1.
pub fn synthetic_dataset(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let occ: String = OCCUPATIONS.iter().map(|o| format!("{o}\n")).collect();
    fs::write(dir.join("u.occupation"), occ).unwrap();
    let genres: String = GENRES.iter().enumerate().map(|(i, g)| format!("{g}|{i}\n")).collect();
    fs::write(dir.join("u.genre"), genres).unwrap();
    let mut users = String::new();
    for u in 1..=943 {
        let age = rng.random_range(7..=73);
        let gender = if rng.random_bool(0.5) { "M" } else { "F" };
        let occ = OCCUPATIONS[rng.random_range(0..OCCUPATIONS.len())];
        users.push_str(&format!("{u}|{age}|{gender}|{occ}|00000\n"));
    }
    fs::write(dir.join("u.user"), users).unwrap();
    let mut items = String::new();
    for m in 1..=1682 {
        let date = if m == 267 { String::new() } else { format!("01-Jan-{}", rng.random_range(1925..=1998)) };
        let flags: Vec<&str> = (0..19).map(|_| if rng.random_bool(0.2) { "1" } else { "0" }).collect();
        items.push_str(&format!("{m}|Movie {m} (1990)|{date}||http://example.org|{}\n", flags.join("|")));
    }
    fs::write(dir.join("u.item"), items).unwrap();

    // Ratings follow a low-rank signal so that every stage has something
    // to learn.
    let uf: Vec<f64> = (0..943).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mf: Vec<f64> = (0..1682).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut seen = std::collections::HashSet::new();
    let mut lines = Vec::new();
    while lines.len() < 5000 {
        let u = rng.random_range(0..200usize);
        let m = rng.random_range(0..300usize);
        if !seen.insert((u, m)) {
            continue;
        }
        let r = (3.0 + 1.5 * uf[u] * mf[m] + rng.random_range(-0.7..0.7)).round().clamp(1.0, 5.0) as u8;
        lines.push(format!("{}\t{}\t{r}\t{}\n", u + 1, m + 1, 880_000_000 + lines.len()));
    }
    fs::write(dir.join("u.data"), lines.concat()).unwrap();
    fs::write(dir.join("u1.base"), lines[..4000].concat()).unwrap();
    fs::write(dir.join("u1.test"), lines[4000..].concat()).unwrap();
}

/// A config small enough to run every stage in seconds.
pub const TINY_CONFIG: &str = r#"
seed = 5
sweep_dims = [2, 4]
ablation = true

[autoencoder]
latent_dim = 4
epochs = 6

[[gbt_setups]]
n_estimators = 4
max_depth = 3
learning_rate = 0.3
colsample_bytree = 0.5

[[gbt_setups]]
n_estimators = 8
max_depth = 3
learning_rate = 0.3
colsample_bytree = 0.5
"#;

pub struct Fixture {
    pub _tmp: tempfile::TempDir,
    pub data: PathBuf,
    pub config: PathBuf,
    pub root: PathBuf,
}

pub fn fixture() -> Fixture {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let data = root.join("ml-100k");
    synthetic_dataset(&data);
    let config = root.join("tiny.toml");
    fs::write(&config, TINY_CONFIG).unwrap();
    Fixture { _tmp: tmp, data, config, root }
}

pub fn attnae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attnae")).args(args).arg("--quiet").output().unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Path of the single file in `dir` whose name starts with `prefix`.
pub fn find(dir: &Path, prefix: &str) -> PathBuf {
    let hits: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(prefix))
        .collect();
    assert_eq!(hits.len(), 1, "files starting with {prefix} in {}: {hits:?}", dir.display());
    hits.into_iter().next().unwrap()
}
