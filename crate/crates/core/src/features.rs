//! One-hot side-information matrices for users and movies.


use crate::dataio::{Gender, MovieRecord, UserRecord, Vocabulary};
use crate::error::{Error, Result};
use crate::numeric::Matrix;

pub const AGE_EDGES: [u32; 6] = [0, 12, 18, 30, 50, 90];
pub const YEAR_EDGES: [i32; 5] = [1920, 1940, 1960, 1980, 2000];
pub const AGE_BUCKETS: usize = AGE_EDGES.len() - 1;
pub const YEAR_BUCKETS: usize = YEAR_EDGES.len() - 1;

/// Dense 0/1 matrix with one labelled column per feature value.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub values: Matrix,
    pub column_labels: Vec<String>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.column_labels.iter().map(|l| csv_field(l)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in self.values.iter_rows() {
            let cells: Vec<&str> = row.iter().map(|&v| if v == 0.0 { "0" } else { "1" }).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Bucket `k` holds ages in `(AGE_EDGES[k], AGE_EDGES[k+1]]`; ages past the
/// last edge fall into the last bucket.
pub fn bin_age(age: u32) -> Result<usize> {
    if age == 0 {
        return Err(Error::Domain("age must be positive".into()));
    }
    Ok(AGE_EDGES[1..].iter().position(|&e| age <= e).unwrap_or(AGE_BUCKETS - 1))
}

/// Same `(a, b]` convention as [`bin_age`], clamped at both ends.
pub fn bin_year(year: Option<i32>) -> Option<usize> {
    let year = year?;
    Some(YEAR_EDGES[1..].iter().position(|&e| year <= e).unwrap_or(YEAR_BUCKETS - 1))
}

fn interval_labels<T: std::fmt::Display>(prefix: &str, edges: &[T]) -> Vec<String> {
    edges.windows(2).map(|w| format!("{prefix}=({},{}]", w[0], w[1])).collect()
}

/// Age, gender and occupation blocks: 5 + 2 + |occupations| columns.
pub fn encode_users(users: &[UserRecord], occupations: &Vocabulary) -> Result<FeatureMatrix> {
    let mut labels = interval_labels("age", &AGE_EDGES);
    labels.push("gender=M".into());
    labels.push("gender=F".into());
    labels.extend(occupations.names().iter().map(|o| format!("occupation={o}")));

    let gender_at = AGE_BUCKETS;
    let occupation_at = gender_at + 2;
    let mut values = Matrix::zeros(users.len(), labels.len());
    for (i, u) in users.iter().enumerate() {
        values[(i, bin_age(u.age)?)] = 1.0;
        values[(i, gender_at + if u.gender == Gender::M { 0 } else { 1 })] = 1.0;
        let occ = occupations
            .index_of(&u.occupation)
            .ok_or_else(|| Error::Domain(format!("unknown occupation {:?}", u.occupation)))?;
        values[(i, occupation_at + occ)] = 1.0;
    }
    Ok(FeatureMatrix { values, column_labels: labels })
}

/// Release-year block followed by the genre flags. An unknown year leaves
/// the year block empty unless `year_unknown_column` adds a dedicated column.
pub fn encode_items(movies: &[MovieRecord], genres: &Vocabulary, year_unknown_column: bool) -> Result<FeatureMatrix> {
    let mut labels = interval_labels("year", &YEAR_EDGES);
    if year_unknown_column {
        labels.push("year=unknown".into());
    }
    let genre_at = labels.len();
    labels.extend(genres.names().iter().map(|g| format!("genre={g}")));

    let mut values = Matrix::zeros(movies.len(), labels.len());
    for (i, m) in movies.iter().enumerate() {
        if m.genre_flags.len() != genres.len() {
            return Err(Error::Dimension(format!(
                "movie {} has {} genre flags, vocabulary has {}",
                m.movie_id,
                m.genre_flags.len(),
                genres.len()
            )));
        }
        match bin_year(m.release_year) {
            Some(k) => values[(i, k)] = 1.0,
            None if year_unknown_column => values[(i, YEAR_BUCKETS)] = 1.0,
            None => {}
        }
        for (g, &set) in m.genre_flags.iter().enumerate() {
            if set {
                values[(i, genre_at + g)] = 1.0;
            }
        }
    }
    Ok(FeatureMatrix { values, column_labels: labels })
}


#[cfg(test)]
mod tests {
    use super::*;

    fn occupations() -> Vocabulary {
        Vocabulary::new(["other", "student", "technician"].map(String::from).to_vec())
    }

    fn genres() -> Vocabulary {
        Vocabulary::new(["unknown", "Action", "Comedy"].map(String::from).to_vec())
    }

    #[test]
    fn age_buckets() {
        assert_eq!(bin_age(12).unwrap(), 0);
        assert_eq!(bin_age(13).unwrap(), 1);
        assert_eq!(bin_age(18).unwrap(), 1);
        assert_eq!(bin_age(24).unwrap(), 2);
        assert_eq!(bin_age(50).unwrap(), 3);
        assert_eq!(bin_age(90).unwrap(), 4);
        assert_eq!(bin_age(95).unwrap(), 4);
        assert!(bin_age(0).is_err());
    }

    #[test]
    fn year_buckets() {
        assert_eq!(bin_year(Some(1995)), Some(3));
        assert_eq!(bin_year(Some(1922)), Some(0));
        assert_eq!(bin_year(Some(1900)), Some(0));
        assert_eq!(bin_year(Some(1940)), Some(0));
        assert_eq!(bin_year(Some(1941)), Some(1));
        assert_eq!(bin_year(Some(2005)), Some(3));
        assert_eq!(bin_year(None), None);
    }

    #[test]
    fn user_row_has_one_hot_per_block() {
        let users = vec![UserRecord {
            user_id: 1,
            age: 24,
            gender: Gender::M,
            occupation: "technician".into(),
            zip: "85711".into(),
        }];
        let f = encode_users(&users, &occupations()).unwrap();
        assert_eq!(f.cols(), 5 + 2 + 3);
        let ones: Vec<&str> = (0..f.cols())
            .filter(|&c| f.values[(0, c)] == 1.0)
            .map(|c| f.column_labels[c].as_str())
            .collect();
        assert_eq!(ones, ["age=(18,30]", "gender=M", "occupation=technician"]);
    }

    fn movie(year: Option<i32>, flags: [bool; 3]) -> MovieRecord {
        MovieRecord { movie_id: 1, title: "t".into(), release_year: year, genre_flags: flags.to_vec() }
    }

    #[test]
    fn item_rows() {
        let f = encode_items(&[movie(Some(1995), [false, false, true]), movie(None, [true, false, false])], &genres(), false)
            .unwrap();
        assert_eq!(f.cols(), 4 + 3);
        assert_eq!(f.values.row(0), &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(&f.values.row(1)[..4], &[0.0; 4]);

        let g = encode_items(&[movie(None, [true, false, false])], &genres(), true).unwrap();
        assert_eq!(g.column_labels[4], "year=unknown");
        assert_eq!(g.values.row(0), &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn labels_are_unique_and_csv_has_header() {
        let f = encode_items(&[movie(Some(1930), [false, true, true])], &genres(), false).unwrap();
        let mut l = f.column_labels.clone();
        l.sort();
        l.dedup();
        assert_eq!(l.len(), f.cols());
        let csv = f.to_csv();
        assert!(csv.starts_with("\"year=(1920,1940]\","));
        assert_eq!(csv.lines().nth(1), Some("1,0,0,0,0,1,1"));
    }
}
