//! MovieLens-style ingestion: three "::"-delimited files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::corpus::{Corpus, Interaction, Item, User};
use crate::error::{Error, Result};

/// ML-1M age codes to human-readable ranges.
const AGE_RANGES: &[(&str, &str)] = &[
    ("1", "Under 18"),
    ("18", "18-24"),
    ("25", "25-34"),
    ("35", "35-44"),
    ("45", "45-49"),
    ("50", "50-55"),
    ("56", "56+"),
];

/// ML-1M occupation code table.
const OCCUPATIONS: &[&str] = &[
    "other",
    "academic/educator",
    "artist",
    "clerical/admin",
    "college/grad student",
    "customer service",
    "doctor/health care",
    "executive/managerial",
    "farmer",
    "homemaker",
    "K-12 student",
    "lawyer",
    "programmer",
    "retired",
    "sales/marketing",
    "scientist",
    "self-employed",
    "technician/engineer",
    "tradesman/craftsman",
    "unemployed",
    "writer",
];

#[derive(Debug, Clone, Copy)]
pub struct MovieLensOptions {
    /// Ratings at or above this value become label-1 interactions.
    pub rating_threshold: f64,
}

impl Default for MovieLensOptions {
    fn default() -> Self {
        MovieLensOptions {
            rating_threshold: 4.0,
        }
    }
}

/// Parse a MovieLens-style directory (`users.dat`, `movies.dat`,
/// `ratings.dat`) into a validated corpus. Age and occupation codes are
/// decoded to readable text; genres split on `|` into the category set.
pub fn parse_movielens(dir: &Path, options: MovieLensOptions) -> Result<Corpus> {
    let users = parse_users(&dir.join("users.dat"))?;
    let items = parse_movies(&dir.join("movies.dat"))?;
    let interactions = parse_ratings(&dir.join("ratings.dat"), options.rating_threshold)?;
    Corpus::new(users, items, interactions)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    // ML-1M ships as ISO-8859-1; lossy conversion keeps the parser total.
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes)
        .lines()
        .map(str::to_string)
        .collect())
}

fn split_record<'a>(
    line: &'a str,
    expected: usize,
    file: &Path,
    lineno: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split("::").collect();
    if fields.len() != expected {
        return Err(Error::MalformedRecord {
            file: file.to_path_buf(),
            line: lineno,
            message: format!("expected {} '::'-delimited fields, got {}", expected, fields.len()),
        });
    }
    Ok(fields)
}

fn parse_users(path: &Path) -> Result<Vec<User>> {
    let mut users = Vec::new();
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        // UserID::Gender::Age::Occupation::Zip
        let fields = split_record(line, 5, path, lineno)?;
        let age_range = AGE_RANGES
            .iter()
            .find(|(code, _)| *code == fields[2])
            .map(|(_, range)| *range)
            .ok_or_else(|| Error::UnknownCode {
                file: path.to_path_buf(),
                line: lineno,
                what: "age",
                code: fields[2].to_string(),
            })?;
        let occupation: usize = fields[3].parse().map_err(|_| Error::UnknownCode {
            file: path.to_path_buf(),
            line: lineno,
            what: "occupation",
            code: fields[3].to_string(),
        })?;
        let occupation_label =
            OCCUPATIONS
                .get(occupation)
                .copied()
                .ok_or_else(|| Error::UnknownCode {
                    file: path.to_path_buf(),
                    line: lineno,
                    what: "occupation",
                    code: fields[3].to_string(),
                })?;
        users.push(User {
            user_id: fields[0].to_string(),
            attributes: BTreeMap::from([
                ("gender".to_string(), fields[1].to_string()),
                ("age_range".to_string(), age_range.to_string()),
                ("occupation_label".to_string(), occupation_label.to_string()),
            ]),
        });
    }
    Ok(users)
}

fn parse_movies(path: &Path) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        // MovieID::Title::Genres
        let fields = split_record(line, 3, path, lineno)?;
        let categories: BTreeSet<String> = fields[2]
            .split('|')
            .filter(|g| !g.is_empty())
            .map(str::to_string)
            .collect();
        items.push(Item {
            item_id: fields[0].to_string(),
            title: fields[1].to_string(),
            categories,
            abstract_text: None,
        });
    }
    Ok(items)
}

fn parse_ratings(path: &Path, threshold: f64) -> Result<Vec<Interaction>> {
    let mut interactions = Vec::new();
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        // UserID::MovieID::Rating::Timestamp
        let fields = split_record(line, 4, path, lineno)?;
        let bad_number = |field: &str| Error::MalformedRecord {
            file: path.to_path_buf(),
            line: lineno,
            message: format!("non-numeric field {field:?}"),
        };
        let rating: f64 = fields[2].parse().map_err(|_| bad_number(fields[2]))?;
        let timestamp: i64 = fields[3].parse().map_err(|_| bad_number(fields[3]))?;
        interactions.push(Interaction {
            user_id: fields[0].to_string(),
            item_id: fields[1].to_string(),
            label: u8::from(rating >= threshold),
            rating: Some(rating),
            timestamp: Some(timestamp),
        });
    }
    Ok(interactions)
}
