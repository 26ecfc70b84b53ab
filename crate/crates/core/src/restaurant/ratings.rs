//! Public ratings and the user-based k-NN recommender that turns them into
//! the platform's predicted utilities.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Users with fewer ratings than this are dropped when loading a CSV.
pub const MIN_RATINGS_PER_USER: usize = 5;

/// Neighbors consulted per prediction.
pub const NEIGHBORS: usize = 20;

pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 5.0;

/// Map a 1..5 star rating onto [0, 1].
pub fn rescale(rating: f64) -> f64 {
    (rating - MIN_RATING) / (MAX_RATING - MIN_RATING)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub restaurant: usize,
    pub value: f64,
}

/// Sparse `(user, restaurant, rating)` triples over dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsTable {
    user_ids: Vec<String>,
    restaurant_ids: Vec<String>,
    ratings: Vec<Rating>,
}

impl RatingsTable {
    pub fn new(user_ids: Vec<String>, restaurant_ids: Vec<String>, ratings: Vec<Rating>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(ratings.len());
        for (k, r) in ratings.iter().enumerate() {
            if r.user >= user_ids.len() || r.restaurant >= restaurant_ids.len() {
                return Err(Error::Config(format!("rating {k} references an unknown index")));
            }
            if !(MIN_RATING..=MAX_RATING).contains(&r.value) {
                return Err(Error::Config(format!(
                    "rating {k} has value {} outside [{MIN_RATING}, {MAX_RATING}]",
                    r.value
                )));
            }
            if seen.insert((r.user, r.restaurant), k).is_some() {
                return Err(Error::Config(format!(
                    "duplicate rating for user {} and restaurant {}",
                    user_ids[r.user], restaurant_ids[r.restaurant]
                )));
            }
        }
        Ok(RatingsTable {
            user_ids,
            restaurant_ids,
            ratings,
        })
    }

    /// Anonymous ids `u0..`, `r0..` for `(user, restaurant, rating)` triples.
    pub fn from_triples(num_users: usize, num_restaurants: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        RatingsTable::new(
            (0..num_users).map(|u| format!("u{u}")).collect(),
            (0..num_restaurants).map(|r| format!("r{r}")).collect(),
            triples
                .iter()
                .map(|&(user, restaurant, value)| Rating {
                    user,
                    restaurant,
                    value,
                })
                .collect(),
        )
    }

    /// Parse `user_id,restaurant_id,rating` CSV. Ids are remapped to dense
    /// indices in order of first appearance. No user filtering happens here.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let expected = ["user_id", "restaurant_id", "rating"];
        if header.len() != 3 || header.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {:?}", expected.join(",")),
            });
        }

        let mut users: HashMap<String, usize> = HashMap::new();
        let mut restaurants: HashMap<String, usize> = HashMap::new();
        let mut user_ids = Vec::new();
        let mut restaurant_ids = Vec::new();
        let mut first_line: HashMap<(usize, usize), usize> = HashMap::new();
        let mut ratings = Vec::new();

        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", record.len()),
                });
            }
            let value: f64 = record[2].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad rating {:?}", &record[2]),
            })?;
            if !(MIN_RATING..=MAX_RATING).contains(&value) {
                return Err(Error::Parse {
                    line,
                    message: format!("rating {value} outside [{MIN_RATING}, {MAX_RATING}]"),
                });
            }
            let user = *users.entry(record[0].to_string()).or_insert_with(|| {
                user_ids.push(record[0].to_string());
                user_ids.len() - 1
            });
            let restaurant = *restaurants.entry(record[1].to_string()).or_insert_with(|| {
                restaurant_ids.push(record[1].to_string());
                restaurant_ids.len() - 1
            });
            if let Some(prev) = first_line.insert((user, restaurant), line) {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "duplicate rating for user {:?} and restaurant {:?} (first at line {prev})",
                        &record[0], &record[1]
                    ),
                });
            }
            ratings.push(Rating {
                user,
                restaurant,
                value,
            });
        }
        RatingsTable::new(user_ids, restaurant_ids, ratings)
    }

    /// Load a ratings CSV and keep only users with enough ratings.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(RatingsTable::from_csv_reader(file)?.filter_min_ratings(MIN_RATINGS_PER_USER))
    }

    /// Drop users with fewer than `min` ratings, then drop restaurants left
    /// without ratings, and re-densify the indices.
    pub fn filter_min_ratings(&self, min: usize) -> Self {
        let mut per_user = vec![0usize; self.user_ids.len()];
        for r in &self.ratings {
            per_user[r.user] += 1;
        }
        let mut user_map = vec![usize::MAX; self.user_ids.len()];
        let mut user_ids = Vec::new();
        for (u, &c) in per_user.iter().enumerate() {
            if c >= min {
                user_map[u] = user_ids.len();
                user_ids.push(self.user_ids[u].clone());
            }
        }
        let mut rest_map = vec![usize::MAX; self.restaurant_ids.len()];
        let mut restaurant_ids = Vec::new();
        let mut ratings = Vec::new();
        for r in &self.ratings {
            if user_map[r.user] == usize::MAX {
                continue;
            }
            if rest_map[r.restaurant] == usize::MAX {
                rest_map[r.restaurant] = restaurant_ids.len();
                restaurant_ids.push(self.restaurant_ids[r.restaurant].clone());
            }
            ratings.push(Rating {
                user: user_map[r.user],
                restaurant: rest_map[r.restaurant],
                value: r.value,
            });
        }
        RatingsTable {
            user_ids,
            restaurant_ids,
            ratings,
        }
    }

    pub fn num_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn num_restaurants(&self) -> usize {
        self.restaurant_ids.len()
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn restaurant_ids(&self) -> &[String] {
        &self.restaurant_ids
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }
}

/// Dense `users x restaurants` matrix of predicted utilities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub num_users: usize,
    pub num_restaurants: usize,
    pub values: Vec<f64>,
}

impl Predictions {
    pub fn get(&self, user: usize, restaurant: usize) -> f64 {
        self.values[user * self.num_restaurants + restaurant]
    }
}

/// Fill the full rating matrix. Observed ratings pass through; a missing
/// entry is the similarity-weighted average rating of the (at most
/// [`NEIGHBORS`]) most similar users who rated the restaurant, where
/// similarity is cosine on mean-centered rating vectors and only positive
/// similarities count. Without such neighbors the restaurant mean is used,
/// then the global mean. Everything is rescaled to [0, 1].
pub fn predict_ratings(table: &RatingsTable) -> Result<Predictions> {
    if table.is_empty() {
        return Err(Error::EmptyRatings);
    }
    let nu = table.num_users();
    let nr = table.num_restaurants();

    let mut observed: Vec<Option<f64>> = vec![None; nu * nr];
    let mut by_user: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nu];
    let mut by_item: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nr];
    for r in table.ratings() {
        observed[r.user * nr + r.restaurant] = Some(r.value);
        by_user[r.user].push((r.restaurant, r.value));
        by_item[r.restaurant].push((r.user, r.value));
    }

    let global_mean = table.ratings().iter().map(|r| r.value).sum::<f64>() / table.ratings().len() as f64;
    let item_mean: Vec<Option<f64>> = by_item
        .iter()
        .map(|v| (!v.is_empty()).then(|| v.iter().map(|x| x.1).sum::<f64>() / v.len() as f64))
        .collect();
    let user_mean: Vec<f64> = by_user
        .iter()
        .map(|v| {
            if v.is_empty() {
                global_mean
            } else {
                v.iter().map(|x| x.1).sum::<f64>() / v.len() as f64
            }
        })
        .collect();
    let norm: Vec<f64> = by_user
        .iter()
        .enumerate()
        .map(|(u, v)| v.iter().map(|x| (x.1 - user_mean[u]).powi(2)).sum::<f64>().sqrt())
        .collect();

    let mut values = vec![0.0; nu * nr];
    let mut dot = vec![0.0f64; nu];
    for u in 0..nu {
        // Centered dot products with every other user via co-rated items.
        dot.iter_mut().for_each(|d| *d = 0.0);
        for &(item, value) in &by_user[u] {
            let cu = value - user_mean[u];
            for &(v, vv) in &by_item[item] {
                if v != u {
                    dot[v] += cu * (vv - user_mean[v]);
                }
            }
        }
        let sim = |v: usize| -> f64 {
            let denom = norm[u] * norm[v];
            if denom > 0.0 {
                dot[v] / denom
            } else {
                0.0
            }
        };

        for item in 0..nr {
            let idx = u * nr + item;
            if let Some(v) = observed[idx] {
                values[idx] = rescale(v);
                continue;
            }
            let mut neighbors: Vec<(f64, usize, f64)> = by_item[item]
                .iter()
                .filter_map(|&(v, rating)| {
                    let s = sim(v);
                    (s > 0.0).then_some((s, v, rating))
                })
                .collect();
            let raw = if neighbors.is_empty() {
                item_mean[item].unwrap_or(global_mean)
            } else {
                neighbors.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
                neighbors.truncate(NEIGHBORS);
                let wsum: f64 = neighbors.iter().map(|n| n.0).sum();
                neighbors.iter().map(|n| n.0 * n.2).sum::<f64>() / wsum
            };
            values[idx] = rescale(raw);
        }
    }
    Ok(Predictions {
        num_users: nu,
        num_restaurants: nr,
        values,
    })
}

/// Parse an optional `restaurant_id,capacity` CSV.
pub fn parse_capacities<R: Read>(reader: R) -> Result<HashMap<String, u32>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.len() != 2 || &header[0] != "restaurant_id" || &header[1] != "capacity" {
        return Err(Error::Parse {
            line: 1,
            message: "expected header \"restaurant_id,capacity\"".into(),
        });
    }
    let mut out = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let cap: u32 = record
            .get(1)
            .and_then(|c| c.parse().ok())
            .filter(|&c| c > 0)
            .ok_or_else(|| Error::Parse {
                line,
                message: "capacity must be a positive integer".into(),
            })?;
        if out.insert(record[0].to_string(), cap).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate capacity for restaurant {:?}", &record[0]),
            });
        }
    }
    Ok(out)
}
