use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use crate::domain::{ClockTime, Restaurant, Slot, SlotMap, Weekday};
use crate::error::{Error, Result};
use crate::text::normalize_value;

const BUNDLED_RESTAURANTS: &str = include_str!("../../data/restaurants.json");
const BUNDLED_ONTOLOGY: &str = include_str!("../../data/ontology.json");

/// Restaurants ordered by name, indexed by (food, area, pricerange).
#[derive(Debug, Clone)]
pub struct RestaurantDb {
    restaurants: Vec<Restaurant>,
    by_search_key: HashMap<(String, String, String), Vec<usize>>,
}

#[derive(Deserialize)]
struct DbRecord {
    name: Option<String>,
    food: Option<String>,
    area: Option<String>,
    pricerange: Option<String>,
    address: Option<String>,
    phone: Option<String>,
    postcode: Option<String>,
}

impl RestaurantDb {
    pub fn new(restaurants: Vec<Restaurant>) -> Result<Self> {
        let mut restaurants: Vec<Restaurant> = restaurants
            .into_iter()
            .map(|r| Restaurant {
                name: normalize_value(&r.name),
                food: normalize_value(&r.food),
                area: normalize_value(&r.area),
                pricerange: normalize_value(&r.pricerange),
                address: normalize_value(&r.address),
                phone: normalize_value(&r.phone),
                postcode: normalize_value(&r.postcode),
            })
            .collect();
        if let Some(bad) = restaurants.iter().find(|r| !r.is_well_formed()) {
            return Err(Error::InsufficientData(format!(
                "restaurant record `{}` has empty fields",
                bad.name
            )));
        }
        restaurants.sort_by(|a, b| a.name.cmp(&b.name));
        let mut seen = HashSet::new();
        for r in &restaurants {
            if !seen.insert(r.name.as_str()) {
                return Err(Error::InsufficientData(format!("duplicate restaurant `{}`", r.name)));
            }
        }
        let mut by_search_key: HashMap<_, Vec<usize>> = HashMap::new();
        for (i, r) in restaurants.iter().enumerate() {
            by_search_key
                .entry((r.food.clone(), r.area.clone(), r.pricerange.clone()))
                .or_default()
                .push(i);
        }
        Ok(RestaurantDb {
            restaurants,
            by_search_key,
        })
    }

    /// The 30-record database shipped with the crate.
    pub fn bundled() -> Self {
        let rows: Vec<Restaurant> =
            serde_json::from_str(BUNDLED_RESTAURANTS).expect("bundled restaurant data is valid");
        RestaurantDb::new(rows).expect("bundled restaurant data is consistent")
    }

    /// Reads a MultiWOZ `restaurant_db.json`; records with missing fields are skipped.
    pub fn from_multiwoz_file(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        let records: Vec<DbRecord> = serde_json::from_str(&raw)?;
        let rows = records
            .into_iter()
            .filter_map(|r| {
                Some(Restaurant {
                    name: r.name?,
                    food: r.food?,
                    area: r.area?,
                    pricerange: r.pricerange?,
                    address: r.address?,
                    phone: r.phone?,
                    postcode: r.postcode?,
                })
            })
            .filter(Restaurant::is_well_formed)
            .collect();
        RestaurantDb::new(rows)
    }

    pub fn load_or_bundled(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) if p.exists() => RestaurantDb::from_multiwoz_file(p),
            _ => Ok(RestaurantDb::bundled()),
        }
    }

    pub fn all(&self) -> &[Restaurant] {
        &self.restaurants
    }

    pub fn len(&self) -> usize {
        self.restaurants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.restaurants.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Restaurant> {
        let name = normalize_value(name);
        self.restaurants
            .binary_search_by(|r| r.name.as_str().cmp(&name))
            .ok()
            .map(|i| &self.restaurants[i])
    }

    /// Every restaurant satisfying all constraints, in name order.
    pub fn query(&self, constraints: &SlotMap) -> Vec<&Restaurant> {
        if let Some(name) = constraints.get(&Slot::Name) {
            return self.get(name).into_iter().collect();
        }
        let key = |s: Slot| constraints.get(&s).map(|v| normalize_value(v));
        if let (Some(f), Some(a), Some(p)) = (key(Slot::Food), key(Slot::Area), key(Slot::Pricerange)) {
            if constraints.len() == 3 {
                return self
                    .by_search_key
                    .get(&(f, a, p))
                    .map(|ids| ids.iter().map(|&i| &self.restaurants[i]).collect())
                    .unwrap_or_default();
            }
        }
        self.restaurants.iter().filter(|r| r.matches(constraints)).collect()
    }
}

/// Values the informable slots can take, beyond what the database happens to hold.
#[derive(Debug, Clone, Deserialize)]
pub struct Ontology {
    pub food: Vec<String>,
    pub area: Vec<String>,
    pub pricerange: Vec<String>,
}

impl Ontology {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED_ONTOLOGY).expect("bundled ontology is valid")
    }

    pub fn values(&self, slot: Slot) -> &[String] {
        match slot {
            Slot::Food => &self.food,
            Slot::Area => &self.area,
            Slot::Pricerange => &self.pricerange,
            _ => &[],
        }
    }
}

/// Fully booked on friday and saturday evenings between 18:00 and 19:59.
pub fn booking_available(day: Weekday, time: ClockTime) -> bool {
    !(matches!(day, Weekday::Friday | Weekday::Saturday) && (18..20).contains(&time.hour))
}
