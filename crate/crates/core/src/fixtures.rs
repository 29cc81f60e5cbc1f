//! Built-in documents: the hand-drawn character space used throughout the
//! tests and docs, and the data shipped with the domain packs.

use crate::constraint::{constraints_from_json, SymbolicConstraint};
use crate::space::{DesignSpace, ElementName};

pub const OPEN_PEEPS_SPACE: &str = include_str!("../data/open_peeps.json");
pub const OPEN_PEEPS_CONSTRAINTS: &str = include_str!("../data/open_peeps_constraints.json");
pub const OPEN_PEEPS_STUB_RULES: &str = include_str!("../data/stub_rules/open_peeps.json");
pub const OPEN_PEEPS_REFERRALS: &str = include_str!("../data/referrals/open_peeps.json");
pub const OPEN_PEEPS_REQUIREMENT: &str = "a cool and sporty girl character";

pub const VIS_STUB_RULES: &str = include_str!("../data/stub_rules/vis.json");
pub const VIS_REFERRALS: &str = include_str!("../data/referrals/vis.json");

pub const KNIT_SPACE: &str = include_str!("../data/knit_space.json");
pub const KNIT_STUB_RULES: &str = include_str!("../data/stub_rules/knit.json");
pub const KNIT_REFERRALS: &str = include_str!("../data/referrals/knit.json");
pub const KNIT_TEMPLATE: &str = include_str!("../data/prompts/knit_template.txt");
pub const KNIT_REQUIREMENT: &str = "A desert-inspired knitted dress that evokes a sense of mystery and elegance";

pub const CARS_CSV: &str = include_str!("../data/datasets/cars.csv");
pub const RENTALS_CSV: &str = include_str!("../data/datasets/rentals.csv");
pub const SALES_CSV: &str = include_str!("../data/datasets/sales.csv");

pub const SCATTER_QUERY: &str = "Show the correlation between weight and mile per gallon for cars.";
pub const STACKED_BAR_QUERY: &str =
    "Show me about the distribution of 'date address from' and the sum of 'monthly rental', grouped by other details.";

/// Visualization questions paired with the dataset they ask about, covering
/// every mark, every aggregation method and both sort directions.
pub const VIS_QUERIES: [(&str, &str); 12] = [
    (CARS_CSV, SCATTER_QUERY),
    (RENTALS_CSV, STACKED_BAR_QUERY),
    (CARS_CSV, "Show the average horsepower for each origin in a bar chart."),
    (CARS_CSV, "How many cars come from each origin? Show the proportion in a pie chart."),
    (SALES_CSV, "Show the trend of total revenue by month for each region as a line chart."),
    (CARS_CSV, "Compare the weight and horsepower of cars, sized by cylinders."),
    (SALES_CSV, "Show total units sold for each product in a bar chart, sorted by units in descending order."),
    (SALES_CSV, "What share of revenue does each region contribute? Use a pie chart."),
    (RENTALS_CSV, "List the monthly rental of each student as bars sorted in ascending order of monthly rental."),
    (SALES_CSV, "Show the relationship between units and revenue colored by product."),
    (CARS_CSV, "Show the minimum weight of cars for each origin, ordered by origin descending."),
    (SALES_CSV, "How many records are there per region, split by product?"),
];

/// Five-dimension character illustration space (head, face, accessories,
/// facial-hair, body), five elements each.
pub fn open_peeps_space() -> DesignSpace {
    DesignSpace::from_json(OPEN_PEEPS_SPACE).expect("built-in space is valid")
}

/// Two hard rules (female head, no facial hair) and two unit-weight
/// preferences (calm face; sunglasses with sporty tee).
pub fn open_peeps_constraints() -> Vec<SymbolicConstraint> {
    constraints_from_json(OPEN_PEEPS_CONSTRAINTS, &open_peeps_space())
        .expect("built-in constraints resolve")
}

/// Optimum for the built-in constraints under the lexicographic tie-break.
pub fn open_peeps_expected_tuple() -> Vec<ElementName> {
    [
        ("head", "woman bangs black"),
        ("face", "calm"),
        ("accessories", "sunglasses"),
        ("facial-hair", "none"),
        ("body", "sporty tee"),
    ]
    .into_iter()
    .map(|(d, e)| ElementName::new(d, e))
    .collect()
}
