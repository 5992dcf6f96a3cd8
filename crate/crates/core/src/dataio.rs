//! Readers for the MovieLens 100K distribution files.
//!
//! Entity counts are fixed at 943 users and 1682 movies so that every fold
//! yields rating matrices of the same shape, whichever entities it contains.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

pub const N_USERS: usize = 943;
pub const N_MOVIES: usize = 1682;

/// Which entity a matrix row stands for. The movie side works on the
/// transposed rating matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    User,
    Movie,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::User => "user",
            Side::Movie => "movie",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RatingTriplet {
    pub user_id: u32,
    pub movie_id: u32,
    pub rating: u8,
    pub timestamp: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatingData {
    triplets: Vec<RatingTriplet>,
    n_users: usize,
    n_movies: usize,
}

impl RatingData {
    /// Validates id ranges, rating scale and pair uniqueness.
    pub fn new(triplets: Vec<RatingTriplet>, n_users: usize, n_movies: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(triplets.len());
        for t in &triplets {
            check_triplet(t, n_users, n_movies).map_err(Error::Domain)?;
            if !seen.insert((t.user_id, t.movie_id)) {
                return Err(Error::Domain(format!(
                    "duplicate rating for user {} movie {}",
                    t.user_id, t.movie_id
                )));
            }
        }
        Ok(RatingData { triplets, n_users, n_movies })
    }

    pub fn empty() -> Self {
        RatingData { triplets: Vec::new(), n_users: N_USERS, n_movies: N_MOVIES }
    }

    pub fn triplets(&self) -> &[RatingTriplet] {
        &self.triplets
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_movies(&self) -> usize {
        self.n_movies
    }

    pub fn density(&self) -> f64 {
        self.triplets.len() as f64 / (self.n_users * self.n_movies) as f64
    }

    pub fn pairs(&self) -> HashSet<(u32, u32)> {
        self.triplets.iter().map(|t| (t.user_id, t.movie_id)).collect()
    }

    /// Subset by triplet index, keeping the entity counts.
    pub fn select(&self, indices: &[usize]) -> RatingData {
        RatingData {
            triplets: indices.iter().map(|&i| self.triplets[i]).collect(),
            n_users: self.n_users,
            n_movies: self.n_movies,
        }
    }

    /// Dense rating matrix with unknown cells set to 0. Rows are users for
    /// [`Side::User`] and movies for [`Side::Movie`].
    pub fn dense(&self, side: Side) -> Matrix {
        let (rows, cols) = match side {
            Side::User => (self.n_users, self.n_movies),
            Side::Movie => (self.n_movies, self.n_users),
        };
        let mut m = Matrix::zeros(rows, cols);
        for t in &self.triplets {
            let (u, v) = (t.user_id as usize - 1, t.movie_id as usize - 1);
            let (r, c) = match side {
                Side::User => (u, v),
                Side::Movie => (v, u),
            };
            m[(r, c)] = f64::from(t.rating);
        }
        m
    }

    /// Serializes in the `u.data` layout.
    pub fn to_tsv(&self) -> String {
        let mut out = String::with_capacity(self.triplets.len() * 20);
        for t in &self.triplets {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", t.user_id, t.movie_id, t.rating, t.timestamp));
        }
        out
    }
}

fn check_triplet(t: &RatingTriplet, n_users: usize, n_movies: usize) -> Result<(), String> {
    if t.user_id == 0 || t.user_id as usize > n_users {
        return Err(format!("user id {} out of range", t.user_id));
    }
    if t.movie_id == 0 || t.movie_id as usize > n_movies {
        return Err(format!("movie id {} out of range", t.movie_id));
    }
    if !(1..=5).contains(&t.rating) {
        return Err("rating out of range".to_string());
    }
    Ok(())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|e| Error::parse(path, 0, format!("invalid UTF-8: {e}")))
}

/// Bytes above 0x7f map to the code point of the same value.
fn latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

fn int_field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("non-integer {name} field {raw:?}")))
}

pub fn parse_ratings(path: impl AsRef<Path>) -> Result<RatingData> {
    let path = path.as_ref();
    parse_ratings_str(&read_text(path)?, path)
}

/// Parses `user \t movie \t rating \t timestamp` rows. `origin` is only used
/// in error messages.
pub fn parse_ratings_str(text: &str, origin: &Path) -> Result<RatingData> {
    let mut triplets = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                origin,
                line,
                format!("field count: expected 4, found {}", fields.len()),
            ));
        }
        let t = RatingTriplet {
            user_id: int_field(origin, line, "user_id", fields[0])?,
            movie_id: int_field(origin, line, "movie_id", fields[1])?,
            rating: int_field(origin, line, "rating", fields[2])
                .map_err(|_| Error::parse(origin, line, "rating out of range"))?,
            timestamp: int_field(origin, line, "timestamp", fields[3])?,
        };
        check_triplet(&t, N_USERS, N_MOVIES).map_err(|m| Error::parse(origin, line, m))?;
        if !seen.insert((t.user_id, t.movie_id)) {
            return Err(Error::parse(origin, line, "duplicate (user, movie) pair"));
        }
        triplets.push(t);
    }
    Ok(RatingData { triplets, n_users: N_USERS, n_movies: N_MOVIES })
}

/// An ordered list of category names, as found in `u.occupation` or `u.genre`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary(Vec<String>);

impl Vocabulary {
    pub fn new(names: Vec<String>) -> Self {
        Vocabulary(names)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }
}

/// One name per line.
pub fn parse_occupations(path: impl AsRef<Path>) -> Result<Vocabulary> {
    let text = read_text(path.as_ref())?;
    Ok(Vocabulary(
        text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
    ))
}

/// `name|index` rows; the index must match the row position.
pub fn parse_genres(path: impl AsRef<Path>) -> Result<Vocabulary> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut names = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let (name, pos) = raw
            .rsplit_once('|')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected name|index"))?;
        let pos: usize = int_field(path, idx + 1, "index", pos)?;
        if pos != names.len() {
            return Err(Error::parse(path, idx + 1, format!("genre index {pos} out of order")));
        }
        names.push(name.to_string());
    }
    Ok(Vocabulary(names))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    M,
    F,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserRecord {
    pub user_id: u32,
    pub age: u32,
    pub gender: Gender,
    pub occupation: String,
    pub zip: String,
}

pub fn parse_users(path: impl AsRef<Path>, occupations: &Vocabulary) -> Result<Vec<UserRecord>> {
    let path = path.as_ref();
    parse_users_str(&read_text(path)?, path, occupations)
}

pub fn parse_users_str(text: &str, origin: &Path, occupations: &Vocabulary) -> Result<Vec<UserRecord>> {
    let mut users = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('|').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                origin,
                line,
                format!("field count: expected 5, found {}", fields.len()),
            ));
        }
        let user_id: u32 = int_field(origin, line, "user_id", fields[0])?;
        let age: u32 = int_field(origin, line, "age", fields[1])?;
        if age == 0 {
            return Err(Error::parse(origin, line, "age out of range"));
        }
        let gender = match fields[2] {
            "M" => Gender::M,
            "F" => Gender::F,
            other => return Err(Error::parse(origin, line, format!("unknown gender {other:?}"))),
        };
        if occupations.index_of(fields[3]).is_none() {
            return Err(Error::parse(origin, line, format!("unknown occupation {:?}", fields[3])));
        }
        users.push(UserRecord {
            user_id,
            age,
            gender,
            occupation: fields[3].to_string(),
            zip: fields[4].to_string(),
        });
    }
    Ok(users)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MovieRecord {
    pub movie_id: u32,
    pub title: String,
    pub release_year: Option<i32>,
    pub genre_flags: Vec<bool>,
}

pub const N_GENRES: usize = 19;

pub fn parse_items(path: impl AsRef<Path>) -> Result<Vec<MovieRecord>> {
    let path = path.as_ref();
    parse_items_bytes(&read_bytes(path)?, path)
}

/// `u.item` is Latin-1 encoded; titles are decoded byte by byte.
pub fn parse_items_bytes(bytes: &[u8], origin: &Path) -> Result<Vec<MovieRecord>> {
    let mut movies = Vec::new();
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        if raw.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let text = latin1(raw);
        let fields: Vec<&str> = text.split('|').collect();
        if fields.len() < 5 {
            return Err(Error::parse(
                origin,
                line,
                format!("field count: expected at least 5, found {}", fields.len()),
            ));
        }
        let flags = &fields[5..];
        if flags.len() != N_GENRES {
            return Err(Error::parse(
                origin,
                line,
                format!("genre flag count: expected {N_GENRES}, found {}", flags.len()),
            ));
        }
        let genre_flags = flags
            .iter()
            .map(|f| match f.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::parse(origin, line, format!("genre flag {other:?} not in {{0,1}}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        movies.push(MovieRecord {
            movie_id: int_field(origin, line, "movie_id", fields[0])?,
            title: fields[1].to_string(),
            release_year: release_year(fields[2]).map_err(|m| Error::parse(origin, line, m))?,
            genre_flags,
        });
    }
    Ok(movies)
}

const MONTHS: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

/// Year component of a `DD-Mon-YYYY` date; empty input means unknown.
pub fn release_year(date: &str) -> Result<Option<i32>, String> {
    let date = date.trim();
    if date.is_empty() {
        return Ok(None);
    }
    let parts: Vec<&str> = date.split('-').collect();
    let bad = || format!("malformed release date {date:?}");
    if parts.len() != 3 || !MONTHS.contains(&parts[1]) || parts[0].parse::<u8>().is_err() {
        return Err(bad());
    }
    parts[2].parse().map(Some).map_err(|_| bad())
}

fn fold_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.base")), dir.join(format!("{name}.test")))
}

/// Loads `<name>.base` / `<name>.test` as a (train, test) pair.
pub fn load_split(dir: impl AsRef<Path>, name: &str) -> Result<(RatingData, RatingData)> {
    let (base, test) = fold_paths(dir.as_ref(), name);
    for p in [&base, &test] {
        if !p.exists() {
            return Err(Error::MissingFile(p.clone()));
        }
    }
    Ok((parse_ratings(&base)?, parse_ratings(&test)?))
}

/// Side information for both entity types.
#[derive(Clone, Debug)]
pub struct Metadata {
    pub occupations: Vocabulary,
    pub genres: Vocabulary,
    pub users: Vec<UserRecord>,
    pub movies: Vec<MovieRecord>,
}

impl Metadata {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let occupations = parse_occupations(dir.join("u.occupation"))?;
        let genres = parse_genres(dir.join("u.genre"))?;
        let users = parse_users(dir.join("u.user"), &occupations)?;
        let movies = parse_items(dir.join("u.item"))?;
        if genres.len() != N_GENRES {
            return Err(Error::Domain(format!("expected {N_GENRES} genres, found {}", genres.len())));
        }
        check_ids(users.iter().map(|u| u.user_id), N_USERS, "u.user")?;
        check_ids(movies.iter().map(|m| m.movie_id), N_MOVIES, "u.item")?;
        Ok(Metadata { occupations, genres, users, movies })
    }
}

fn check_ids(ids: impl Iterator<Item = u32>, expected: usize, file: &str) -> Result<()> {
    let mut count = 0;
    for (i, id) in ids.enumerate() {
        if id as usize != i + 1 {
            return Err(Error::Domain(format!("{file}: record {} has id {id}", i + 1)));
        }
        count += 1;
    }
    if count != expected {
        return Err(Error::Domain(format!("{file}: expected {expected} records, found {count}")));
    }
    Ok(())
}
