//! Vocabulary for generated catalogs.

const BASES: [&str; 60] = [
    "chicken",
    "beef",
    "salmon",
    "tuna",
    "turkey",
    "lamb",
    "duck",
    "venison",
    "rabbit",
    "whitefish",
    "mackerel",
    "sardine",
    "cod",
    "shrimp",
    "pork",
    "liver",
    "egg",
    "rice",
    "corn",
    "wheat",
    "barley",
    "oats",
    "pea",
    "potato",
    "sweet potato",
    "tapioca",
    "soybean",
    "beet pulp",
    "cellulose",
    "carrot",
    "pumpkin",
    "spinach",
    "cranberry",
    "blueberry",
    "apple",
    "kelp",
    "flaxseed",
    "yeast",
    "taurine",
    "fish oil",
    "chicken fat",
    "animal fat",
    "sunflower oil",
    "inulin",
    "chicory root",
    "glucosamine",
    "lecithin",
    "gelatin",
    "whey",
    "casein",
    "alfalfa",
    "tomato",
    "green tea",
    "rosemary",
    "psyllium",
    "guar gum",
    "carrageenan",
    "plasma",
    "krill",
    "anchovy",
];

const MODIFIERS: [&str; 8] = ["", "dried", "hydrolyzed", "ground", "fresh", "deboned", "powdered", "refined"];

/// The first `n` generated ingredient tokens: every base, then each
/// modifier applied to every base, then numbered variants if still short.
/// Tokens are already in normalized form.
pub fn ingredient_names(n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut round = 0;
    while out.len() < n {
        for m in MODIFIERS {
            for b in BASES {
                if out.len() == n {
                    return out;
                }
                let name = match (m.is_empty(), round) {
                    (true, 0) => b.to_string(),
                    (false, 0) => format!("{m} {b}"),
                    (true, r) => format!("{b} {}", r + 1),
                    (false, r) => format!("{m} {b} {}", r + 1),
                };
                out.push(name);
            }
        }
        round += 1;
    }
    out
}

pub const BRANDS: [&str; 12] = [
    "Purrfect",
    "Whisker Farm",
    "Northpaw",
    "Meadow Cat",
    "Felicity",
    "Tailwind",
    "Kitto",
    "Bluehill",
    "Catalina",
    "Maru Kitchen",
    "Nekomori",
    "Silverleaf",
];

pub const LINES: [&str; 8] = ["Adult", "Indoor", "Kitten", "Senior", "Grain Free", "Classic", "Premium", "Hairball"];

pub const FLAVORS: [&str; 10] = [
    "Chicken",
    "Salmon",
    "Tuna",
    "Turkey & Rice",
    "Ocean Fish",
    "Beef",
    "Duck",
    "Seafood Medley",
    "Lamb",
    "Chicken & Liver",
];

/// Therapeutic names containing a disease or function keyword, including
/// full-width and mixed-case spellings.
pub const TARGET_STEMS: [&str; 12] = [
    "Urinary Care",
    "Urinary S/O",
    "pH Control",
    "PH CARE",
    "pH Balance",
    "Mineral Control",
    "FLUTD Support",
    "ＦＬＵＴＤ Ｃａｒｅ",
    "Lower Urinary Tract Health",
    "Struvite Dissolution",
    "Ｕｒｉｎａｒｙ Ｄｉｓｅａｓｅ",
    "Stone Prevention",
];

/// Therapeutic names that match no keyword.
pub const UNMATCHED_STEMS: [&str; 6] =
    ["Renal Support", "Weight Management", "Hepatic Care", "Gastrointestinal", "Hypoallergenic", "Diabetic Care"];

pub const TREAT_STEMS: [&str; 5] =
    ["Crunchy Treats", "Lickable Puree", "Freeze-Dried Bites", "Dental Chews", "Jerky Strips"];
