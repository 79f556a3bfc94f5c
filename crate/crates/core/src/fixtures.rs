//! Canonical small instances used throughout the tests and documentation.

use crate::fd::Sigma;
use crate::instance::Instance;

const TOUR_SCHEMA: [&str; 3] = ["cyclist", "country", "capital"];

fn tour_with(t1_country: &str, t2_country: &str) -> Instance {
    Instance::from_rows(
        &TOUR_SCHEMA,
        vec![
            vec!["Marcel Kittel", t1_country, "Berlin"],
            vec!["Marcel Kittel", t2_country, "Berlin"],
            vec!["Andre Greipel", "Germany", "Berlin"],
            vec!["Emanuel Buchmann", "Germany", "Berlin"],
            vec!["Paul Martens", "Germany", "Berlin"],
        ],
    )
    .expect("static fixture")
}

/// Five cyclists; t1 and t2 disagree on Marcel Kittel's country.
pub fn tour() -> Instance {
    tour_with("Russia", "Germany")
}

/// Tour with t2's country set to "Russia".
pub fn tour_r1() -> Instance {
    tour_with("Russia", "Russia")
}

/// Tour with t1's country set to "Germany"; the correct repair.
pub fn tour_r2() -> Instance {
    tour_with("Germany", "Germany")
}

/// `cyclist -> country`, `country -> capital`.
pub fn tour_sigma() -> Sigma {
    Sigma::parse("cyclist -> country\ncountry -> capital\n").expect("static fixture")
}

pub const TOUR_CSV: &str = "cyclist,country,capital\n\
Marcel Kittel,Russia,Berlin\n\
Marcel Kittel,Germany,Berlin\n\
Andre Greipel,Germany,Berlin\n\
Emanuel Buchmann,Germany,Berlin\n\
Paul Martens,Germany,Berlin\n";

pub const TOUR_FDS: &str = "# cyclist determines country, country determines capital\n\
cyclist -> country\n\
country -> capital\n";

/// The six printed rows of the ranked Tour table.
pub fn tour_rank() -> Instance {
    Instance::from_rows(
        &["rank", "cyclist", "country", "capital"],
        vec![
            vec!["166", "Marcel Kittel", "Russia", "Berlin"],
            vec!["166", "Marcel Kittel", "Germany", "Berlin"],
            vec!["166", "Andre Greipel", "Germany", "Berlin"],
            vec!["133", "Andre Greipel", "Germany", "Berlin"],
            vec!["21", "Emanuel Buchmann", "Germany", "Berlin"],
            vec!["98", "Paul Martens", "Germany", "Berlin"],
        ],
    )
    .expect("static fixture")
}

/// Tour rules plus the `rank <-> cyclist` cycle.
pub fn tour_rank_sigma() -> Sigma {
    Sigma::parse("cyclist -> country\ncountry -> capital\nrank -> cyclist\ncyclist -> rank\n")
        .expect("static fixture")
}

/// `A -> B`, `B -> C` over four tuples. A-values a1, a2 reach b1; a2 also
/// reaches b2; b1 fans out to c1, c2, c3 and b2 reaches c2.
pub fn abc() -> Instance {
    Instance::from_rows(
        &["A", "B", "C"],
        vec![
            vec!["a1", "b1", "c1"],
            vec!["a2", "b1", "c2"],
            vec!["a1", "b1", "c3"],
            vec!["a2", "b2", "c2"],
        ],
    )
    .expect("static fixture")
}

pub fn abc_sigma() -> Sigma {
    Sigma::parse("A -> B\nB -> C\n").expect("static fixture")
}

/// Two-tuple chain `{(a1,b1,c1), (a2,b1,c1)}` under `A -> B`, `B -> C`.
pub fn chain() -> Instance {
    Instance::from_rows(
        &["A", "B", "C"],
        vec![vec!["a1", "b1", "c1"], vec!["a2", "b1", "c1"]],
    )
    .expect("static fixture")
}
