//! Seeded synthetic sources for the drug-interactions, pathways and
//! clinical-trials graphs, with mapping configs and a manifest of expected
//! counts and cross-graph query results.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mapping::{
    ColumnType, EdgeMapping, EndpointLookup, FilterOp, KeyColumn, MappingConfig, MissingEndpoint, NodeMapping,
    PropertyColumn, RowFilter,
};
use super::EtlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Small,
    Medium,
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "small" => Ok(Scale::Small),
            "medium" => Ok(Scale::Medium),
            other => Err(format!("unknown scale `{other}` (expected small or medium)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub seed: u64,
    pub scale: Scale,
    pub kgs: Vec<KgManifest>,
    /// Gene symbols present both as `Gene.gene_name` and `Protein.name`.
    pub gene_bridges: Vec<String>,
    /// Drug names present both as `Drug.name` and `Intervention.name`.
    pub drug_trial_bridges: Vec<String>,
    pub queries: Vec<ExpectedQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KgManifest {
    pub name: String,
    /// Mapping config path relative to the corpus directory.
    pub mapping: String,
    pub labels: BTreeMap<String, u64>,
    pub edge_types: BTreeMap<String, u64>,
}

impl KgManifest {
    pub fn node_total(&self) -> u64 {
        self.labels.values().sum()
    }

    pub fn edge_total(&self) -> u64 {
        self.edge_types.values().sum()
    }
}

/// A federation query and its exact result over the loaded corpus, in the
/// engine's canonical row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedQuery {
    pub name: String,
    pub query: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CorpusManifest {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, EtlError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| EtlError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| EtlError::Config(format!("{}: {e}", path.display())))
    }

    pub fn kg(&self, name: &str) -> Option<&KgManifest> {
        self.kgs.iter().find(|k| k.name == name)
    }

    pub fn query(&self, name: &str) -> Option<&ExpectedQuery> {
        self.queries.iter().find(|q| q.name == name)
    }
}

pub const DRUG_KG: &str = "drug_interactions";
pub const PATHWAYS_KG: &str = "pathways";
pub const TRIALS_KG: &str = "clinical_trials";

const METFORMIN_QUERY: &str = "MATCH (d:Drug {name: 'Metformin'})-[:INTERACTS_WITH_GENE]->(g:Gene)
MATCH (p:Protein)-[:PARTICIPATES_IN]->(pw:Pathway)
WHERE p.name = g.gene_name
RETURN g.gene_name, pw.name LIMIT 10";

const WARFARIN_QUERY: &str = "MATCH (d:Drug {name: 'Warfarin'})
MATCH (i:Intervention)<-[:TESTS]-(ct:ClinicalTrial)
WHERE i.name = d.name
RETURN ct.nct_id, ct.phase LIMIT 10";

const DIABETES_QUERY: &str = "MATCH (d:Drug)-[:HAS_INDICATION]->(i:Indication)
MATCH (d)-[:INTERACTS_WITH_GENE]->(g:Gene)
MATCH (p:Protein)-[:PARTICIPATES_IN]->(pw:Pathway)
WHERE i.name CONTAINS 'Diabetes' AND p.name = g.gene_name
RETURN d.name, g.gene_name, pw.name";

/// The cross-graph bridge queries, by manifest name.
pub const FEDERATION_QUERIES: [(&str, &str); 3] = [
    ("metformin_pathways", METFORMIN_QUERY),
    ("warfarin_trials", WARFARIN_QUERY),
    ("diabetes_chain", DIABETES_QUERY),
];

struct Sizes {
    drugs: usize,
    genes: usize,
    side_effects: usize,
    indications: usize,
    interacts_with_gene: usize,
    has_side_effect: usize,
    has_indication: usize,
    synonyms: usize,
    pathways: usize,
    reactions: usize,
    complexes: usize,
    proteins: usize,
    non_human_proteins: usize,
    go_terms: usize,
    participates_in: usize,
    catalyzes: usize,
    component_of: usize,
    interacts_with: usize,
    low_confidence: usize,
    annotated_with: usize,
    is_a: usize,
    part_of: usize,
    regulates: usize,
    child_of: usize,
    trials: usize,
    conditions: usize,
    interventions: usize,
    sponsors: usize,
    gene_bridges: usize,
    drug_trial_bridges: usize,
}

impl Sizes {
    fn of(scale: Scale) -> Sizes {
        match scale {
            Scale::Small => Sizes {
                drugs: 200,
                genes: 80,
                side_effects: 60,
                indications: 40,
                interacts_with_gene: 400,
                has_side_effect: 600,
                has_indication: 150,
                synonyms: 500,
                pathways: 20,
                reactions: 30,
                complexes: 20,
                proteins: 200,
                non_human_proteins: 20,
                go_terms: 100,
                participates_in: 400,
                catalyzes: 150,
                component_of: 60,
                interacts_with: 300,
                low_confidence: 100,
                annotated_with: 400,
                is_a: 120,
                part_of: 30,
                regulates: 15,
                child_of: 22,
                trials: 150,
                conditions: 40,
                interventions: 60,
                sponsors: 12,
                gene_bridges: 40,
                drug_trial_bridges: 15,
            },
            Scale::Medium => Sizes {
                drugs: 19_842,
                genes: 4_182,
                side_effects: 5_858,
                indications: 2_844,
                interacts_with_gene: 38_033,
                has_side_effect: 139_193,
                has_indication: 14_744,
                synonyms: 52_154,
                pathways: 2_848,
                reactions: 9_988,
                complexes: 15_963,
                proteins: 37_990,
                non_human_proteins: 3_000,
                go_terms: 51_897,
                participates_in: 140_153,
                catalyzes: 121_365,
                component_of: 8_186,
                interacts_with: 227_818,
                low_confidence: 40_000,
                annotated_with: 265_492,
                is_a: 58_799,
                part_of: 7_122,
                regulates: 2_986,
                child_of: 2_864,
                trials: 10_000,
                conditions: 1_200,
                interventions: 3_000,
                sponsors: 400,
                gene_bridges: 1_500,
                drug_trial_bridges: 500,
            },
        }
    }
}

struct PlantedDrug {
    name: &'static str,
    drugbank_id: &'static str,
    genes: &'static [&'static str],
    indications: &'static [&'static str],
    side_effects: &'static [&'static str],
}

const PLANTED_DRUGS: &[PlantedDrug] = &[
    PlantedDrug {
        name: "Metformin",
        drugbank_id: "DB00331",
        genes: &["HNF1B", "SERPINE1", "PRKAA1", "PRKAA2", "SLC22A1"],
        indications: &["Type 2 Diabetes Mellitus"],
        side_effects: &["Lactic Acidosis", "Diarrhea", "Nausea"],
    },
    PlantedDrug {
        name: "Glipizide",
        drugbank_id: "DB01067",
        genes: &["ABCC8", "KCNJ11"],
        indications: &["Type 2 Diabetes Mellitus"],
        side_effects: &["Hypoglycemia"],
    },
    PlantedDrug {
        name: "Pioglitazone",
        drugbank_id: "DB01132",
        genes: &["PPARG"],
        indications: &["Type 2 Diabetes Mellitus"],
        side_effects: &["Edema"],
    },
    PlantedDrug {
        name: "Warfarin",
        drugbank_id: "DB00682",
        genes: &["VKORC1", "CYP2C9", "CYP4F2"],
        indications: &["Atrial Fibrillation", "Deep Vein Thrombosis", "Pulmonary Embolism"],
        side_effects: &[
            "Hemorrhage",
            "Bruising",
            "Epistaxis",
            "Hematuria",
            "Gastrointestinal Hemorrhage",
            "Skin Necrosis",
            "Purple Toe Syndrome",
            "Alopecia",
            "Nausea",
            "Abdominal Pain",
        ],
    },
    PlantedDrug {
        name: "Aspirin",
        drugbank_id: "DB00945",
        genes: &["PTGS1", "PTGS2"],
        indications: &["Pain", "Fever"],
        side_effects: &["Gastrointestinal Hemorrhage", "Tinnitus"],
    },
];

/// Planted `Protein.name` → pathway names.
const PLANTED_PATHWAYS: &[(&str, &[&str])] = &[
    ("HNF1B", &["Developmental Biology", "Regulation of gene expression in beta cells"]),
    ("SERPINE1", &["Circadian clock", "Dissolution of Fibrin Clot"]),
    ("PRKAA1", &["Energy dependent regulation of mTOR by LKB1-AMPK", "Metabolism of lipids"]),
    ("PRKAA2", &["Energy dependent regulation of mTOR by LKB1-AMPK", "Macroautophagy"]),
    ("SLC22A1", &["Organic cation transport", "Transport of small molecules", "Abacavir transmembrane transport"]),
    ("ABCC8", &["Regulation of insulin secretion"]),
    ("KCNJ11", &["Regulation of insulin secretion"]),
    ("PPARG", &["Transcriptional regulation of white adipocyte differentiation"]),
    ("VKORC1", &["Gamma-carboxylation of protein precursors"]),
    ("CYP2C9", &["Biological oxidations"]),
    ("CYP4F2", &["Biological oxidations"]),
    ("PTGS1", &["Synthesis of Prostaglandins and Thromboxanes"]),
    ("PTGS2", &["Synthesis of Prostaglandins and Thromboxanes"]),
];

/// Trials testing Warfarin: (nct_id, phase, conditions).
const WARFARIN_TRIALS: &[(&str, &str, &[&str])] = &[
    ("NCT00835861", "PHASE2", &["Atrial Fibrillation"]),
    ("NCT00839657", "PHASE3", &["Atrial Fibrillation", "Venous Thromboembolism"]),
    ("NCT01006733", "PHASE4", &["Venous Thromboembolism"]),
    ("NCT00401414", "PHASE3", &["Deep Vein Thrombosis"]),
    ("NCT02065388", "PHASE2", &["Atrial Fibrillation"]),
];

const PLANTED_CONDITIONS: &[&str] = &[
    "Atrial Fibrillation",
    "Venous Thromboembolism",
    "Deep Vein Thrombosis",
    "Type 2 Diabetes Mellitus",
    "Breast Cancer",
    "Metastatic Breast Cancer",
    "Triple Negative Breast Cancer",
];

const DRUG_PREFIX: &[&str] = &[
    "Ab", "Ac", "Al", "Am", "An", "Ar", "Ba", "Be", "Bo", "Ca", "Ce", "Cl", "Da", "De", "Di", "Do", "Du", "Es", "Fe",
    "Fl", "Ga", "Gl", "Ha", "Hy", "Ib", "Im", "In", "Ke", "La", "Le", "Li", "Lo", "Ma", "Me", "Mi", "Mo", "Na", "Ne",
    "Ni", "No", "Ol", "Pa", "Pe", "Pi", "Pr", "Qu", "Ra", "Re", "Ri", "Ro", "Sa", "Se", "Si", "So", "Su", "Ta", "Te",
    "Ti", "To", "Tr", "Va", "Ve", "Vi", "Xa", "Za", "Ze", "Zo",
];
const DRUG_MIDDLE: &[&str] = &[
    "ba", "ce", "da", "fi", "ga", "lo", "ma", "ne", "pi", "ro", "sa", "ti", "vo", "xi", "zo", "li", "mu", "ra", "te",
    "no",
];
const DRUG_SUFFIX: &[&str] = &[
    "mab", "nib", "pril", "sartan", "statin", "olol", "azole", "cillin", "mycin", "oxacin", "tide", "vir", "zepam",
    "done", "dine", "fen", "mide", "pine", "sone", "trel", "zumab", "lukast", "gliptin", "parin", "floxacin",
];
const BRAND_SUFFIX: &[&str] = &["ex", "ol", "an", "ix", "on", "ar", "yn", "a", "o", "um"];
const INTERACTION_TYPES: &[&str] = &[
    "inhibitor",
    "activator",
    "agonist",
    "antagonist",
    "substrate",
    "inducer",
    "blocker",
    "modulator",
];
const SEVERITY: &[&str] = &["Acute", "Chronic", "Mild", "Severe", "Transient", "Recurrent", "Localized", "Generalized"];
const BODY: &[&str] = &[
    "Abdominal",
    "Cardiac",
    "Renal",
    "Hepatic",
    "Ocular",
    "Skin",
    "Muscle",
    "Joint",
    "Respiratory",
    "Gastric",
    "Neural",
    "Vascular",
];
const SYMPTOM: &[&str] = &[
    "Pain",
    "Rash",
    "Swelling",
    "Disorder",
    "Toxicity",
    "Irritation",
    "Weakness",
    "Bleeding",
    "Inflammation",
    "Dysfunction",
    "Spasm",
    "Discoloration",
];
const STAGE: &[&str] = &[
    "Acute",
    "Chronic",
    "Recurrent",
    "Metastatic",
    "Early",
    "Advanced",
    "Refractory",
    "Pediatric",
    "Hereditary",
    "Idiopathic",
];
const ORGAN: &[&str] = &[
    "Lung",
    "Liver",
    "Kidney",
    "Heart",
    "Skin",
    "Colon",
    "Brain",
    "Bone",
    "Blood",
    "Pancreatic",
    "Prostate",
    "Ovarian",
    "Thyroid",
    "Gastric",
    "Breast",
];
const DISEASE: &[&str] = &[
    "Cancer",
    "Disease",
    "Failure",
    "Fibrosis",
    "Infection",
    "Inflammation",
    "Lymphoma",
    "Carcinoma",
    "Syndrome",
    "Insufficiency",
];
const PATHWAY_VERB: &[&str] = &[
    "Signaling by",
    "Metabolism of",
    "Regulation of",
    "Transport of",
    "Degradation of",
    "Biosynthesis of",
    "Activation of",
    "Response to",
];
const MOLECULE: &[&str] = &[
    "amino acids",
    "nucleotides",
    "carbohydrates",
    "steroids",
    "vitamins",
    "cytokines",
    "growth factors",
    "hormones",
    "ions",
    "fatty acids",
    "glycoproteins",
    "RNA",
    "DNA",
    "receptors",
    "kinases",
    "phosphatases",
    "chaperones",
    "integrins",
    "collagens",
    "interleukins",
];
const REACTION_VERB: &[&str] = &[
    "Phosphorylation of",
    "Binding of",
    "Cleavage of",
    "Dephosphorylation of",
    "Ubiquitination of",
    "Translocation of",
    "Dimerization of",
    "Hydrolysis of",
];
const GO_HEAD: &[&str] = &[
    "regulation of",
    "positive regulation of",
    "negative regulation of",
    "response to",
    "cellular response to",
    "establishment of",
];
const GO_NAMESPACES: &[&str] = &["biological_process", "molecular_function", "cellular_component"];
const EVIDENCE: &[&str] = &["IEA", "IDA", "IMP", "TAS", "ISS", "IPI"];
const PHASES: &[&str] = &["EARLY_PHASE1", "PHASE1", "PHASE2", "PHASE3", "PHASE4", "NA"];
const STATUSES: &[&str] = &["RECRUITING", "COMPLETED", "ACTIVE_NOT_RECRUITING", "TERMINATED", "WITHDRAWN"];
const INTERVENTION_KINDS: &[&str] = &["BEHAVIORAL", "DEVICE", "PROCEDURE", "DIETARY_SUPPLEMENT", "OTHER"];
const SPONSOR_KIND: &[&str] = &["University", "Hospital", "Institute", "Pharmaceuticals", "Foundation", "Research Group"];
const CITY: &[&str] = &[
    "Boston", "Oslo", "Kyoto", "Lyon", "Basel", "Austin", "Leiden", "Pune", "Seoul", "Porto", "Perth", "Turin",
];

/// Draws names from `make`, retrying on collisions and falling back to a
/// numeric suffix.
struct NameSource {
    taken: HashSet<String>,
}

impl NameSource {
    fn new() -> Self {
        NameSource { taken: HashSet::new() }
    }

    fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }

    fn fresh(&mut self, rng: &mut ChaCha8Rng, sep: &str, make: impl Fn(&mut ChaCha8Rng) -> String) -> String {
        let mut base = make(rng);
        for _ in 0..20 {
            if self.taken.insert(base.clone()) {
                return base;
            }
            base = make(rng);
        }
        for k in 2.. {
            let candidate = format!("{base}{sep}{k}");
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
        unreachable!()
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

fn drug_name(rng: &mut ChaCha8Rng) -> String {
    let mut s = pick(rng, DRUG_PREFIX).to_string();
    for _ in 0..rng.gen_range(0..=2) {
        s.push_str(pick(rng, DRUG_MIDDLE));
    }
    s.push_str(pick(rng, DRUG_SUFFIX));
    s
}

fn brand_name(rng: &mut ChaCha8Rng) -> String {
    let mut s = pick(rng, DRUG_PREFIX).to_string();
    for _ in 0..rng.gen_range(1..=2) {
        s.push_str(pick(rng, DRUG_MIDDLE));
    }
    s.push_str(pick(rng, BRAND_SUFFIX));
    s
}

fn gene_symbol(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(2..=4);
    let mut s: String = (0..len).map(|_| (b'A' + rng.gen_range(0..26u8)) as char).collect();
    if rng.gen_bool(0.8) {
        s.push_str(&rng.gen_range(1..100).to_string());
    }
    s
}

/// Samples `count` distinct pairs from `left × right`. Every element of
/// `cover` (an index into `right`) appears at least once when possible.
/// Pairs already in `seen` are never produced.
fn sample_pairs(
    rng: &mut ChaCha8Rng,
    count: usize,
    left: &[usize],
    right: &[usize],
    cover: &[usize],
    seen: &mut HashSet<(usize, usize)>,
    allow_self: bool,
) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(count);
    for &r in cover {
        if out.len() == count {
            break;
        }
        for _ in 0..100 {
            let l = left[rng.gen_range(0..left.len())];
            if (allow_self || l != r) && seen.insert((l, r)) {
                out.push((l, r));
                break;
            }
        }
    }
    while out.len() < count {
        let l = left[rng.gen_range(0..left.len())];
        let r = right[rng.gen_range(0..right.len())];
        if (allow_self || l != r) && seen.insert((l, r)) {
            out.push((l, r));
        }
    }
    out
}

struct Drug {
    id: String,
    name: String,
    synonyms: Vec<String>,
}

struct DrugKg {
    drugs: Vec<Drug>,
    genes: Vec<String>,
    side_effects: Vec<(String, String)>,
    indications: Vec<(String, String)>,
    gene_edges: Vec<(usize, usize, &'static str)>,
    side_effect_edges: Vec<(usize, usize, usize)>,
    indication_edges: Vec<(usize, usize, usize)>,
}

struct Protein {
    uniprot_id: String,
    name: String,
    human: bool,
}

struct PathwaysKg {
    pathways: Vec<(String, String)>,
    child_of: Vec<(usize, usize)>,
    reactions: Vec<(String, String)>,
    complexes: Vec<(String, String)>,
    proteins: Vec<Protein>,
    go_terms: Vec<(String, String, &'static str)>,
    participates: Vec<(usize, usize)>,
    catalyzes: Vec<(usize, usize)>,
    component_of: Vec<(usize, usize)>,
    interactions: Vec<(usize, usize, u32)>,
    go_edges: Vec<(usize, usize, &'static str)>,
    annotations: Vec<(usize, usize, &'static str)>,
}

struct Trial {
    nct_id: String,
    title: String,
    phase: &'static str,
    status: &'static str,
    conditions: Vec<usize>,
    interventions: Vec<usize>,
    sponsor: usize,
}

struct TrialsKg {
    conditions: Vec<(String, String)>,
    interventions: Vec<(String, &'static str)>,
    sponsors: Vec<String>,
    trials: Vec<Trial>,
}

fn gen_drugs(rng: &mut ChaCha8Rng, sz: &Sizes, genes: Vec<String>) -> DrugKg {
    let mut names = NameSource::new();
    for p in PLANTED_DRUGS {
        names.reserve(p.name);
    }
    let mut drugs: Vec<Drug> = PLANTED_DRUGS
        .iter()
        .map(|p| Drug {
            id: p.drugbank_id.to_string(),
            name: p.name.to_string(),
            synonyms: Vec::new(),
        })
        .collect();
    for i in drugs.len()..sz.drugs {
        drugs.push(Drug {
            id: format!("DB{:05}", 10_000 + i),
            name: names.fresh(rng, "-", drug_name),
            synonyms: Vec::new(),
        });
    }
    let mut cids: Vec<usize> = (0..sz.drugs).collect();
    cids.shuffle(rng);
    for (drug, cid) in drugs.iter_mut().zip(cids) {
        drug.synonyms.push(format!("CID1{:08}", cid * 37 + 11));
    }
    let mut brands = NameSource::new();
    for d in &drugs {
        brands.reserve(&d.name);
    }
    for _ in sz.drugs..sz.synonyms {
        let d = rng.gen_range(0..drugs.len());
        let brand = brands.fresh(rng, "-", brand_name);
        drugs[d].synonyms.push(brand);
    }

    let mut se_names = NameSource::new();
    let mut side_effects: Vec<String> = Vec::new();
    for p in PLANTED_DRUGS {
        for s in p.side_effects {
            if !side_effects.iter().any(|x| x == s) {
                side_effects.push(s.to_string());
                se_names.reserve(s);
            }
        }
    }
    while side_effects.len() < sz.side_effects {
        side_effects.push(se_names.fresh(rng, " Grade ", |r| {
            format!("{} {} {}", pick(r, SEVERITY), pick(r, BODY), pick(r, SYMPTOM))
        }));
    }
    let mut ind_names = NameSource::new();
    let mut indications: Vec<String> = Vec::new();
    for p in PLANTED_DRUGS {
        for s in p.indications {
            if !indications.iter().any(|x| x == s) {
                indications.push(s.to_string());
                ind_names.reserve(s);
            }
        }
    }
    while indications.len() < sz.indications {
        indications.push(ind_names.fresh(rng, " Type ", |r| {
            format!("{} {} {}", pick(r, STAGE), pick(r, ORGAN), pick(r, DISEASE))
        }));
    }
    let side_effects: Vec<(String, String)> = side_effects
        .into_iter()
        .enumerate()
        .map(|(i, n)| (format!("C{:07}", 10_000 + i * 3), n))
        .collect();
    let indications: Vec<(String, String)> = indications
        .into_iter()
        .enumerate()
        .map(|(i, n)| (format!("C{:07}", 5_000_000 + i * 3), n))
        .collect();

    let gene_index: HashMap<&str, usize> = genes.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let se_index: HashMap<&str, usize> = side_effects.iter().enumerate().map(|(i, s)| (s.1.as_str(), i)).collect();
    let ind_index: HashMap<&str, usize> = indications.iter().enumerate().map(|(i, s)| (s.1.as_str(), i)).collect();
    let random_drugs: Vec<usize> = (PLANTED_DRUGS.len()..sz.drugs).collect();

    let mut seen = HashSet::new();
    let mut planted = Vec::new();
    for (d, p) in PLANTED_DRUGS.iter().enumerate() {
        for g in p.genes {
            seen.insert((d, gene_index[g]));
            planted.push((d, gene_index[g]));
        }
    }
    let covered: HashSet<usize> = planted.iter().map(|&(_, g)| g).collect();
    let cover: Vec<usize> = (0..genes.len()).filter(|g| !covered.contains(g)).collect();
    let all_genes: Vec<usize> = (0..genes.len()).collect();
    let extra = sample_pairs(rng, sz.interacts_with_gene - planted.len(), &random_drugs, &all_genes, &cover, &mut seen, true);
    let mut gene_edges: Vec<(usize, usize, &'static str)> = planted
        .into_iter()
        .chain(extra)
        .map(|(d, g)| (d, g, pick(rng, INTERACTION_TYPES)))
        .collect();
    gene_edges.shuffle(rng);

    let synonym_edges = |rng: &mut ChaCha8Rng, count: usize, lists: Vec<&[&str]>, index: &HashMap<&str, usize>, n: usize, reserved: &[usize]| {
        let mut seen = HashSet::new();
        let mut planted = Vec::new();
        for (d, list) in lists.iter().enumerate() {
            for s in list.iter() {
                seen.insert((d, index[s]));
                planted.push((d, index[s]));
            }
        }
        let covered: HashSet<usize> = planted.iter().map(|&(_, s)| s).collect();
        let pool: Vec<usize> = (0..n).filter(|s| !reserved.contains(s)).collect();
        let cover: Vec<usize> = pool.iter().copied().filter(|s| !covered.contains(s)).collect();
        let extra = sample_pairs(rng, count - planted.len(), &random_drugs, &pool, &cover, &mut seen, true);
        let mut edges: Vec<(usize, usize, usize)> = planted
            .into_iter()
            .chain(extra)
            .map(|(d, s)| (d, s, rng.gen_range(0..usize::MAX)))
            .collect();
        edges.shuffle(rng);
        edges
    };
    let side_effect_edges = synonym_edges(
        rng,
        sz.has_side_effect,
        PLANTED_DRUGS.iter().map(|p| p.side_effects).collect(),
        &se_index,
        side_effects.len(),
        &[],
    );
    let diabetes: Vec<usize> = indications
        .iter()
        .enumerate()
        .filter(|(_, (_, n))| n.contains("Diabetes"))
        .map(|(i, _)| i)
        .collect();
    let indication_edges = synonym_edges(
        rng,
        sz.has_indication,
        PLANTED_DRUGS.iter().map(|p| p.indications).collect(),
        &ind_index,
        indications.len(),
        &diabetes,
    );
    // The third field picks which synonym names the compound.
    let fix = |edges: Vec<(usize, usize, usize)>| -> Vec<(usize, usize, usize)> {
        edges
            .into_iter()
            .map(|(d, s, r)| (d, s, r % drugs[d].synonyms.len()))
            .collect()
    };
    let side_effect_edges = fix(side_effect_edges);
    let indication_edges = fix(indication_edges);
    DrugKg {
        drugs,
        genes,
        side_effects,
        indications,
        gene_edges,
        side_effect_edges,
        indication_edges,
    }
}

/// Gene symbols for the drug graph and protein names for the pathways
/// graph, overlapping in exactly `gene_bridges` symbols.
fn gen_symbols(rng: &mut ChaCha8Rng, sz: &Sizes) -> (Vec<String>, Vec<String>, Vec<String>) {
    let mut names = NameSource::new();
    let planted: Vec<String> = PLANTED_DRUGS
        .iter()
        .flat_map(|p| p.genes.iter())
        .map(|g| g.to_string())
        .collect();
    for g in &planted {
        names.reserve(g);
    }
    let mut bridges = planted.clone();
    while bridges.len() < sz.gene_bridges {
        bridges.push(names.fresh(rng, "-", gene_symbol));
    }
    let mut genes = bridges.clone();
    while genes.len() < sz.genes {
        genes.push(names.fresh(rng, "-", gene_symbol));
    }
    let mut proteins = bridges.clone();
    while proteins.len() < sz.proteins {
        proteins.push(names.fresh(rng, "-", gene_symbol));
    }
    genes.shuffle(rng);
    proteins.shuffle(rng);
    bridges.sort();
    (genes, proteins, bridges)
}

fn gen_pathways(rng: &mut ChaCha8Rng, sz: &Sizes, protein_names: Vec<String>) -> PathwaysKg {
    let mut names = NameSource::new();
    let mut pathway_names: Vec<String> = Vec::new();
    for (_, list) in PLANTED_PATHWAYS {
        for p in list.iter() {
            if !pathway_names.iter().any(|x| x == p) {
                pathway_names.push(p.to_string());
                names.reserve(p);
            }
        }
    }
    let planted_pathways = pathway_names.len();
    while pathway_names.len() < sz.pathways {
        pathway_names.push(names.fresh(rng, " ", |r| format!("{} {}", pick(r, PATHWAY_VERB), pick(r, MOLECULE))));
    }
    let pathways: Vec<(String, String)> = pathway_names
        .into_iter()
        .enumerate()
        .map(|(i, n)| (format!("R-HSA-{}", 100_000 + i), n))
        .collect();
    let reactions: Vec<(String, String)> = (0..sz.reactions)
        .map(|i| {
            let n = names.fresh(rng, " ", |r| format!("{} {}", pick(r, REACTION_VERB), pick(r, MOLECULE)));
            (format!("R-HSA-{}", 1_000_000 + i), n)
        })
        .collect();
    let complexes: Vec<(String, String)> = (0..sz.complexes)
        .map(|i| {
            let a = &protein_names[rng.gen_range(0..protein_names.len())];
            let b = &protein_names[rng.gen_range(0..protein_names.len())];
            let n = names.fresh(rng, " ", |_| format!("{a}:{b} complex"));
            (format!("R-HSA-{}", 3_000_000 + i), n)
        })
        .collect();

    let mut ids = NameSource::new();
    let uniprot = |rng: &mut ChaCha8Rng| format!("{}{:05}", pick(rng, &["P", "Q", "O"]), rng.gen_range(0..100_000));
    let mut proteins: Vec<Protein> = protein_names
        .into_iter()
        .map(|name| Protein {
            uniprot_id: ids.fresh(rng, "-", uniprot),
            name,
            human: true,
        })
        .collect();
    let human_count = proteins.len();
    let mut other_names = NameSource::new();
    for _ in 0..sz.non_human_proteins {
        proteins.push(Protein {
            uniprot_id: ids.fresh(rng, "-", uniprot),
            name: other_names.fresh(rng, "-", gene_symbol),
            human: false,
        });
    }

    let by_name: HashMap<&str, usize> = proteins[..human_count]
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();
    let pathway_by_name: HashMap<&str, usize> =
        pathways.iter().enumerate().map(|(i, p)| (p.1.as_str(), i)).collect();
    let mut seen = HashSet::new();
    let mut participates = Vec::new();
    let mut planted_proteins = HashSet::new();
    for (protein, list) in PLANTED_PATHWAYS {
        let p = by_name[protein];
        planted_proteins.insert(p);
        for pw in list.iter() {
            seen.insert((p, pathway_by_name[pw]));
            participates.push((p, pathway_by_name[pw]));
        }
    }
    let free_proteins: Vec<usize> = (0..human_count).filter(|p| !planted_proteins.contains(p)).collect();
    let all_pathways: Vec<usize> = (0..pathways.len()).collect();
    let random_pathways: Vec<usize> = (planted_pathways..pathways.len()).collect();
    let count = sz.participates_in - participates.len();
    participates.extend(sample_pairs(rng, count, &free_proteins, &all_pathways, &random_pathways, &mut seen, true));
    participates.shuffle(rng);

    let humans: Vec<usize> = (0..human_count).collect();
    let reaction_idx: Vec<usize> = (0..reactions.len()).collect();
    let complex_idx: Vec<usize> = (0..complexes.len()).collect();
    let catalyzes = sample_pairs(rng, sz.catalyzes, &humans, &reaction_idx, &[], &mut HashSet::new(), true);
    let component_of = sample_pairs(rng, sz.component_of, &humans, &complex_idx, &[], &mut HashSet::new(), true);

    let mut seen = HashSet::new();
    let pairs = sample_pairs(rng, sz.interacts_with + sz.low_confidence, &humans, &humans, &[], &mut seen, false);
    let mut interactions: Vec<(usize, usize, u32)> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let score = match i {
                0 => 700,
                i if i < sz.interacts_with => rng.gen_range(700..=999),
                i if i == sz.interacts_with => 699,
                _ => rng.gen_range(150..700),
            };
            (a, b, score)
        })
        .collect();
    interactions.shuffle(rng);

    let go_terms: Vec<(String, String, &'static str)> = (0..sz.go_terms)
        .map(|i| {
            let n = names.fresh(rng, " ", |r| format!("{} {}", pick(r, GO_HEAD), pick(r, MOLECULE)));
            (format!("GO:{:07}", 1_000 + i * 7), n, pick(rng, GO_NAMESPACES))
        })
        .collect();
    let mut seen = HashSet::new();
    let mut go_edges = Vec::new();
    for (relation, count) in [("is_a", sz.is_a), ("part_of", sz.part_of), ("regulates", sz.regulates)] {
        let mut made = 0;
        while made < count {
            let child = rng.gen_range(1..go_terms.len());
            let parent = rng.gen_range(0..child);
            if seen.insert((child, parent)) {
                go_edges.push((child, parent, relation));
                made += 1;
            }
        }
    }
    go_edges.shuffle(rng);
    let go_idx: Vec<usize> = (0..go_terms.len()).collect();
    let annotations: Vec<(usize, usize, &'static str)> =
        sample_pairs(rng, sz.annotated_with, &humans, &go_idx, &[], &mut HashSet::new(), true)
            .into_iter()
            .map(|(p, g)| (p, g, pick(rng, EVIDENCE)))
            .collect();

    let mut seen = HashSet::new();
    let mut child_of = Vec::new();
    while child_of.len() < sz.child_of {
        let child = rng.gen_range(1..pathways.len());
        let parent = rng.gen_range(0..child);
        if seen.insert((child, parent)) {
            child_of.push((child, parent));
        }
    }
    PathwaysKg {
        pathways,
        child_of,
        reactions,
        complexes,
        proteins,
        go_terms,
        participates,
        catalyzes,
        component_of,
        interactions,
        go_edges,
        annotations,
    }
}

const INTERVENTION_ADJ: &[&str] = &[
    "Intensive",
    "Standard",
    "Remote",
    "Guided",
    "Minimally Invasive",
    "Early",
    "Structured",
    "Digital",
];
const INTERVENTION_THING: &[&str] = &[
    "Training",
    "Counseling",
    "Stent",
    "Catheter",
    "Diet",
    "Exercise Program",
    "Surgery",
    "Imaging",
    "Screening",
    "Monitoring",
];
const STUDY_KIND: &[&str] = &["Study", "Trial", "Evaluation", "Comparison", "Assessment"];

fn gen_trials(rng: &mut ChaCha8Rng, sz: &Sizes, drugs: &[Drug]) -> TrialsKg {
    let mut bridge_drugs: Vec<&str> = PLANTED_DRUGS.iter().map(|p| p.name).collect();
    let mut random: Vec<&str> = drugs[PLANTED_DRUGS.len()..].iter().map(|d| d.name.as_str()).collect();
    random.shuffle(rng);
    bridge_drugs.extend(random.into_iter().take(sz.drug_trial_bridges - PLANTED_DRUGS.len()));

    let mut names = NameSource::new();
    for d in drugs {
        names.reserve(&d.name);
    }
    let mut interventions: Vec<(String, &'static str)> = bridge_drugs.iter().map(|d| (d.to_string(), "DRUG")).collect();
    interventions.push(("Placebo".into(), "DRUG"));
    names.reserve("Placebo");
    while interventions.len() < sz.interventions {
        let n = names.fresh(rng, " ", |r| format!("{} {}", pick(r, INTERVENTION_ADJ), pick(r, INTERVENTION_THING)));
        interventions.push((n, pick(rng, INTERVENTION_KINDS)));
    }

    let mut cond_names = NameSource::new();
    let mut conditions: Vec<String> = PLANTED_CONDITIONS.iter().map(|c| c.to_string()).collect();
    for c in PLANTED_CONDITIONS {
        cond_names.reserve(c);
    }
    while conditions.len() < sz.conditions {
        conditions.push(cond_names.fresh(rng, " Type ", |r| {
            format!("{} {} {}", pick(r, STAGE), pick(r, ORGAN), pick(r, DISEASE))
        }));
    }
    let conditions: Vec<(String, String)> = conditions
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, format!("D{:06}", 1_000 + i * 11)))
        .collect();

    let mut sponsor_names = NameSource::new();
    let sponsors: Vec<String> = (0..sz.sponsors)
        .map(|_| sponsor_names.fresh(rng, " ", |r| format!("{} {}", pick(r, CITY), pick(r, SPONSOR_KIND))))
        .collect();
    let mut sponsor_order: Vec<usize> = (0..sponsors.len()).collect();
    sponsor_order.shuffle(rng);

    let cond_index: HashMap<&str, usize> = conditions.iter().enumerate().map(|(i, c)| (c.0.as_str(), i)).collect();
    let warfarin = interventions.iter().position(|i| i.0 == "Warfarin").expect("planted");
    let mut trials = Vec::with_capacity(sz.trials);
    for (nct, phase, conds) in WARFARIN_TRIALS {
        let conditions: Vec<usize> = conds.iter().map(|c| cond_index[c]).collect();
        trials.push(Trial {
            nct_id: nct.to_string(),
            title: format!("Warfarin Dosing in {}", conds[0]),
            phase,
            status: "COMPLETED",
            conditions,
            interventions: vec![warfarin],
            sponsor: 0,
        });
    }
    let other: Vec<usize> = (0..interventions.len()).filter(|&i| i != warfarin).collect();
    while trials.len() < sz.trials {
        let i = trials.len();
        let mut conds: Vec<usize> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let c = rng.gen_range(0..conditions.len());
            if !conds.contains(&c) {
                conds.push(c);
            }
        }
        let mut ivs: Vec<usize> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let v = other[rng.gen_range(0..other.len())];
            if !ivs.contains(&v) {
                ivs.push(v);
            }
        }
        trials.push(Trial {
            nct_id: format!("NCT{:08}", 3_000_000 + i * 13),
            title: format!(
                "{} of {} in {}",
                pick(rng, STUDY_KIND),
                interventions[ivs[0]].0,
                conditions[conds[0]].0
            ),
            phase: pick(rng, PHASES),
            status: pick(rng, STATUSES),
            conditions: conds,
            interventions: ivs,
            sponsor: 0,
        });
    }
    for (i, t) in trials.iter_mut().enumerate() {
        t.sponsor = sponsor_order[i % sponsor_order.len()];
    }
    trials.shuffle(rng);
    TrialsKg {
        conditions,
        interventions,
        sponsors,
        trials,
    }
}

/// Buffered tab-separated writer.
struct Tsv(BufWriter<File>, std::path::PathBuf);

impl Tsv {
    fn create(path: &Path, header: &[&str]) -> Result<Self, EtlError> {
        let file = File::create(path).map_err(|e| EtlError::io(path, e))?;
        let mut t = Tsv(BufWriter::with_capacity(1 << 16, file), path.to_path_buf());
        t.row(header)?;
        Ok(t)
    }

    fn row(&mut self, fields: &[&str]) -> Result<(), EtlError> {
        let line = fields.join("\t");
        writeln!(self.0, "{line}").map_err(|e| EtlError::io(&self.1, e))
    }

    fn finish(mut self) -> Result<(), EtlError> {
        self.0.flush().map_err(|e| EtlError::io(&self.1, e))
    }
}

fn write_drugs(dir: &Path, rng: &mut ChaCha8Rng, kg: &DrugKg) -> Result<(), EtlError> {
    let path = dir.join("drugbank_vocabulary.csv");
    let file = File::create(&path).map_err(|e| EtlError::io(&path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let err = |e: csv::Error| EtlError::io(&path, e);
    w.write_record(["drugbank_id", "name", "synonyms"]).map_err(err)?;
    let mut order: Vec<usize> = (0..kg.drugs.len()).collect();
    order.shuffle(rng);
    for &i in &order {
        let d = &kg.drugs[i];
        w.write_record([d.id.as_str(), d.name.as_str(), d.synonyms.join("|").as_str()]).map_err(err)?;
    }
    w.flush().map_err(|e| EtlError::io(&path, e))?;

    let mut t = Tsv::create(&dir.join("dgidb_interactions.tsv"), &["drug_name", "gene_name", "interaction_type"])?;
    for &(d, g, kind) in &kg.gene_edges {
        t.row(&[&kg.drugs[d].name, &kg.genes[g], kind])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("sider_side_effects.tsv"), &["compound", "meddra_id", "side_effect_name"])?;
    for &(d, s, syn) in &kg.side_effect_edges {
        let (id, name) = &kg.side_effects[s];
        t.row(&[&kg.drugs[d].synonyms[syn], id, name])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("sider_indications.tsv"), &["compound", "meddra_id", "indication_name"])?;
    for &(d, s, syn) in &kg.indication_edges {
        let (id, name) = &kg.indications[s];
        t.row(&[&kg.drugs[d].synonyms[syn], id, name])?;
    }
    t.finish()
}

fn write_pathways(dir: &Path, rng: &mut ChaCha8Rng, kg: &PathwaysKg) -> Result<(), EtlError> {
    let mut t = Tsv::create(&dir.join("reactome_pathways.tsv"), &["reactome_id", "name", "species"])?;
    for (id, name) in &kg.pathways {
        t.row(&[id, name, "Homo sapiens"])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("reactome_pathway_hierarchy.tsv"), &["child_id", "parent_id"])?;
    for &(c, p) in &kg.child_of {
        t.row(&[&kg.pathways[c].0, &kg.pathways[p].0])?;
    }
    t.finish()?;
    for (file, items) in [("reactome_reactions.tsv", &kg.reactions), ("reactome_complexes.tsv", &kg.complexes)] {
        let mut t = Tsv::create(&dir.join(file), &["reactome_id", "name"])?;
        for (id, name) in items {
            t.row(&[id, name])?;
        }
        t.finish()?;
    }
    let mut order: Vec<usize> = (0..kg.proteins.len()).collect();
    order.shuffle(rng);
    let mut t = Tsv::create(&dir.join("uniprot_proteins.tsv"), &["uniprot_id", "gene_symbol", "description", "organism"])?;
    for &i in &order {
        let p = &kg.proteins[i];
        let organism = if p.human {
            "Homo sapiens"
        } else if i % 2 == 0 {
            "Mus musculus"
        } else {
            "Rattus norvegicus"
        };
        t.row(&[&p.uniprot_id, &p.name, &format!("{} protein", p.name), organism])?;
    }
    t.finish()?;
    let uni = |i: usize| kg.proteins[i].uniprot_id.as_str();
    let mut t = Tsv::create(&dir.join("reactome_participation.tsv"), &["uniprot_id", "pathway_id"])?;
    for &(p, pw) in &kg.participates {
        t.row(&[uni(p), &kg.pathways[pw].0])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("reactome_catalysis.tsv"), &["uniprot_id", "reaction_id"])?;
    for &(p, r) in &kg.catalyzes {
        t.row(&[uni(p), &kg.reactions[r].0])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("reactome_complex_components.tsv"), &["uniprot_id", "complex_id"])?;
    for &(p, c) in &kg.component_of {
        t.row(&[uni(p), &kg.complexes[c].0])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("string_interactions.tsv"), &["protein1", "protein2", "combined_score"])?;
    for &(a, b, score) in &kg.interactions {
        t.row(&[uni(a), uni(b), &score.to_string()])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("go_terms.tsv"), &["go_id", "name", "namespace"])?;
    for (id, name, ns) in &kg.go_terms {
        t.row(&[id, name, ns])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("go_hierarchy.tsv"), &["child_id", "parent_id", "relation"])?;
    for &(c, p, rel) in &kg.go_edges {
        t.row(&[&kg.go_terms[c].0, &kg.go_terms[p].0, rel])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("go_annotations.tsv"), &["uniprot_id", "go_id", "evidence"])?;
    for &(p, g, ev) in &kg.annotations {
        t.row(&[uni(p), &kg.go_terms[g].0, ev])?;
    }
    t.finish()
}

fn write_trials(dir: &Path, kg: &TrialsKg) -> Result<(), EtlError> {
    let mut t = Tsv::create(&dir.join("conditions.tsv"), &["name", "mesh_id"])?;
    for (name, mesh) in &kg.conditions {
        t.row(&[name, mesh])?;
    }
    t.finish()?;
    let mut t = Tsv::create(&dir.join("interventions.tsv"), &["name", "intervention_type"])?;
    for (name, kind) in &kg.interventions {
        t.row(&[name, kind])?;
    }
    t.finish()?;
    let mut t = Tsv::create(
        &dir.join("trials.tsv"),
        &["nct_id", "title", "phase", "status", "conditions", "interventions", "sponsor"],
    )?;
    for trial in &kg.trials {
        let conds: Vec<&str> = trial.conditions.iter().map(|&c| kg.conditions[c].0.as_str()).collect();
        let ivs: Vec<&str> = trial.interventions.iter().map(|&i| kg.interventions[i].0.as_str()).collect();
        t.row(&[
            &trial.nct_id,
            &trial.title,
            trial.phase,
            trial.status,
            &conds.join("|"),
            &ivs.join("|"),
            &kg.sponsors[trial.sponsor],
        ])?;
    }
    t.finish()
}

fn node(file: &str, label: &str, key_column: &str, key_property: &str, props: &[(&str, &str)]) -> NodeMapping {
    NodeMapping {
        file: file.into(),
        delimiter: None,
        label: label.into(),
        key: KeyColumn {
            column: key_column.into(),
            property: key_property.into(),
            kind: ColumnType::String,
        },
        properties: props.iter().map(|&(c, p)| column(c, p, ColumnType::String)).collect(),
        indexed: Vec::new(),
        filter: None,
    }
}

fn column(column: &str, property: &str, kind: ColumnType) -> PropertyColumn {
    PropertyColumn {
        column: column.into(),
        property: (column != property).then(|| property.to_string()),
        kind,
        separator: None,
    }
}

fn lookup(label: &str, property: &str, column: &str) -> EndpointLookup {
    EndpointLookup {
        label: label.into(),
        property: property.into(),
        column: column.into(),
        kind: ColumnType::String,
        separator: None,
    }
}

fn edge(file: &str, etype: &str, source: EndpointLookup, target: EndpointLookup) -> EdgeMapping {
    EdgeMapping {
        file: file.into(),
        delimiter: None,
        etype: etype.into(),
        source,
        target,
        properties: Vec::new(),
        filter: None,
        on_missing_endpoint: MissingEndpoint::Skip,
    }
}

fn drug_mapping() -> MappingConfig {
    let mut drugs = node("drugbank_vocabulary.csv", "Drug", "drugbank_id", "drugbank_id", &[("name", "name")]);
    drugs.properties.push(PropertyColumn {
        separator: Some("|".into()),
        ..column("synonyms", "synonyms", ColumnType::StringList)
    });
    drugs.indexed = vec!["name".into(), "synonyms".into()];
    let mut gene_edges = edge(
        "dgidb_interactions.tsv",
        "INTERACTS_WITH_GENE",
        lookup("Drug", "name", "drug_name"),
        lookup("Gene", "gene_name", "gene_name"),
    );
    gene_edges.properties = vec![column("interaction_type", "interaction_type", ColumnType::String)];
    MappingConfig {
        name: DRUG_KG.into(),
        node_mappings: vec![
            drugs,
            node("dgidb_interactions.tsv", "Gene", "gene_name", "gene_name", &[]),
            node("sider_side_effects.tsv", "SideEffect", "meddra_id", "meddra_id", &[("side_effect_name", "name")]),
            node("sider_indications.tsv", "Indication", "meddra_id", "meddra_id", &[("indication_name", "name")]),
        ],
        edge_mappings: vec![
            gene_edges,
            edge(
                "sider_side_effects.tsv",
                "HAS_SIDE_EFFECT",
                lookup("Drug", "synonyms", "compound"),
                lookup("SideEffect", "meddra_id", "meddra_id"),
            ),
            edge(
                "sider_indications.tsv",
                "HAS_INDICATION",
                lookup("Drug", "synonyms", "compound"),
                lookup("Indication", "meddra_id", "meddra_id"),
            ),
        ],
        base_dir: Default::default(),
    }
}

fn pathways_mapping() -> MappingConfig {
    let mut pathways = node("reactome_pathways.tsv", "Pathway", "reactome_id", "reactome_id", &[("name", "name")]);
    pathways.indexed = vec!["name".into()];
    let mut proteins = node(
        "uniprot_proteins.tsv",
        "Protein",
        "uniprot_id",
        "uniprot_id",
        &[("gene_symbol", "name"), ("description", "description")],
    );
    proteins.indexed = vec!["name".into()];
    proteins.filter = Some(RowFilter {
        column: "organism".into(),
        op: FilterOp::Eq,
        value: "Homo sapiens".into(),
    });
    let protein = |col: &str| lookup("Protein", "uniprot_id", col);
    let mut ppi = edge("string_interactions.tsv", "INTERACTS_WITH", protein("protein1"), protein("protein2"));
    ppi.properties = vec![column("combined_score", "score", ColumnType::Int)];
    ppi.filter = Some(RowFilter {
        column: "combined_score".into(),
        op: FilterOp::Ge,
        value: "700".into(),
    });
    let go_relation = |etype: &str, relation: &str| {
        let mut m = edge(
            "go_hierarchy.tsv",
            etype,
            lookup("GOTerm", "go_id", "child_id"),
            lookup("GOTerm", "go_id", "parent_id"),
        );
        m.filter = Some(RowFilter {
            column: "relation".into(),
            op: FilterOp::Eq,
            value: relation.into(),
        });
        m
    };
    let mut annotations = edge("go_annotations.tsv", "ANNOTATED_WITH", protein("uniprot_id"), lookup("GOTerm", "go_id", "go_id"));
    annotations.properties = vec![column("evidence", "evidence", ColumnType::String)];
    MappingConfig {
        name: PATHWAYS_KG.into(),
        node_mappings: vec![
            pathways,
            node("reactome_reactions.tsv", "Reaction", "reactome_id", "reactome_id", &[("name", "name")]),
            node("reactome_complexes.tsv", "Complex", "reactome_id", "reactome_id", &[("name", "name")]),
            proteins,
            node("go_terms.tsv", "GOTerm", "go_id", "go_id", &[("name", "name"), ("namespace", "namespace")]),
        ],
        edge_mappings: vec![
            edge(
                "reactome_pathway_hierarchy.tsv",
                "CHILD_OF",
                lookup("Pathway", "reactome_id", "child_id"),
                lookup("Pathway", "reactome_id", "parent_id"),
            ),
            edge(
                "reactome_participation.tsv",
                "PARTICIPATES_IN",
                protein("uniprot_id"),
                lookup("Pathway", "reactome_id", "pathway_id"),
            ),
            edge(
                "reactome_catalysis.tsv",
                "CATALYZES",
                protein("uniprot_id"),
                lookup("Reaction", "reactome_id", "reaction_id"),
            ),
            edge(
                "reactome_complex_components.tsv",
                "COMPONENT_OF",
                protein("uniprot_id"),
                lookup("Complex", "reactome_id", "complex_id"),
            ),
            ppi,
            go_relation("IS_A", "is_a"),
            go_relation("PART_OF", "part_of"),
            go_relation("REGULATES", "regulates"),
            annotations,
        ],
        base_dir: Default::default(),
    }
}

fn trials_mapping() -> MappingConfig {
    let trial = || lookup("ClinicalTrial", "nct_id", "nct_id");
    let split = |mut l: EndpointLookup| {
        l.separator = Some("|".into());
        l
    };
    MappingConfig {
        name: TRIALS_KG.into(),
        node_mappings: vec![
            node(
                "trials.tsv",
                "ClinicalTrial",
                "nct_id",
                "nct_id",
                &[("title", "title"), ("phase", "phase"), ("status", "status")],
            ),
            node("conditions.tsv", "Condition", "name", "name", &[("mesh_id", "mesh_id")]),
            node("interventions.tsv", "Intervention", "name", "name", &[("intervention_type", "type")]),
            node("trials.tsv", "Sponsor", "sponsor", "name", &[]),
        ],
        edge_mappings: vec![
            edge("trials.tsv", "STUDIES", trial(), split(lookup("Condition", "name", "conditions"))),
            edge("trials.tsv", "TESTS", trial(), split(lookup("Intervention", "name", "interventions"))),
            edge("trials.tsv", "SPONSORED_BY", trial(), lookup("Sponsor", "name", "sponsor")),
        ],
        base_dir: Default::default(),
    }
}

fn counts(pairs: &[(&str, usize)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v as u64)).collect()
}

fn finish_rows(mut rows: Vec<Vec<String>>, limit: Option<usize>) -> Vec<Vec<String>> {
    rows.sort();
    if let Some(n) = limit {
        rows.truncate(n);
    }
    rows
}

fn expected(name: &str, query: &str, columns: &[&str], rows: Vec<Vec<String>>) -> ExpectedQuery {
    ExpectedQuery {
        name: name.into(),
        query: query.into(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    }
}

/// Writes a corpus under `dir` (created if needed) and returns its manifest,
/// after re-deriving every manifest figure from the written files.
pub fn gen_corpus(seed: u64, scale: Scale, dir: impl AsRef<Path>) -> Result<CorpusManifest, EtlError> {
    let dir = dir.as_ref();
    let sz = Sizes::of(scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (genes, protein_names, gene_bridges) = gen_symbols(&mut rng, &sz);
    let drugs = gen_drugs(&mut rng, &sz, genes);
    let pathways = gen_pathways(&mut rng, &sz, protein_names);
    let trials = gen_trials(&mut rng, &sz, &drugs.drugs);

    let sub = |name: &str| -> Result<std::path::PathBuf, EtlError> {
        let d = dir.join(name);
        fs::create_dir_all(&d).map_err(|e| EtlError::io(&d, e))?;
        Ok(d)
    };
    write_drugs(&sub(DRUG_KG)?, &mut rng, &drugs)?;
    write_pathways(&sub(PATHWAYS_KG)?, &mut rng, &pathways)?;
    write_trials(&sub(TRIALS_KG)?, &trials)?;
    for (kg, mapping) in [(DRUG_KG, drug_mapping()), (PATHWAYS_KG, pathways_mapping()), (TRIALS_KG, trials_mapping())] {
        let path = dir.join(kg).join(format!("{kg}.yaml"));
        fs::write(&path, mapping.to_yaml()).map_err(|e| EtlError::io(&path, e))?;
    }

    let human = pathways.proteins.iter().filter(|p| p.human).count();
    let kgs = vec![
        KgManifest {
            name: DRUG_KG.into(),
            mapping: format!("{DRUG_KG}/{DRUG_KG}.yaml"),
            labels: counts(&[
                ("Drug", sz.drugs),
                ("Gene", sz.genes),
                ("SideEffect", sz.side_effects),
                ("Indication", sz.indications),
            ]),
            edge_types: counts(&[
                ("INTERACTS_WITH_GENE", sz.interacts_with_gene),
                ("HAS_SIDE_EFFECT", sz.has_side_effect),
                ("HAS_INDICATION", sz.has_indication),
            ]),
        },
        KgManifest {
            name: PATHWAYS_KG.into(),
            mapping: format!("{PATHWAYS_KG}/{PATHWAYS_KG}.yaml"),
            labels: counts(&[
                ("GOTerm", sz.go_terms),
                ("Protein", human),
                ("Complex", sz.complexes),
                ("Reaction", sz.reactions),
                ("Pathway", sz.pathways),
            ]),
            edge_types: counts(&[
                ("ANNOTATED_WITH", sz.annotated_with),
                ("INTERACTS_WITH", sz.interacts_with),
                ("PARTICIPATES_IN", sz.participates_in),
                ("CATALYZES", sz.catalyzes),
                ("IS_A", sz.is_a),
                ("COMPONENT_OF", sz.component_of),
                ("PART_OF", sz.part_of),
                ("REGULATES", sz.regulates),
                ("CHILD_OF", sz.child_of),
            ]),
        },
        KgManifest {
            name: TRIALS_KG.into(),
            mapping: format!("{TRIALS_KG}/{TRIALS_KG}.yaml"),
            labels: counts(&[
                ("ClinicalTrial", trials.trials.len()),
                ("Condition", trials.conditions.len()),
                ("Intervention", trials.interventions.len()),
                ("Sponsor", trials.sponsors.len()),
            ]),
            edge_types: counts(&[
                ("STUDIES", trials.trials.iter().map(|t| t.conditions.len()).sum()),
                ("TESTS", trials.trials.iter().map(|t| t.interventions.len()).sum()),
                ("SPONSORED_BY", trials.trials.len()),
            ]),
        },
    ];

    let mut drug_trial_bridges: Vec<String> = trials
        .interventions
        .iter()
        .filter(|(_, kind)| *kind == "DRUG")
        .map(|(n, _)| n.clone())
        .filter(|n| drugs.drugs.iter().any(|d| &d.name == n))
        .collect();
    drug_trial_bridges.sort();

    let manifest = CorpusManifest {
        seed,
        scale,
        kgs,
        gene_bridges,
        drug_trial_bridges,
        queries: model_truth(&drugs, &pathways, &trials),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| EtlError::io(&path, e))?;
    check_corpus(dir, &manifest).map_err(|e| EtlError::Config(format!("corpus self-check failed: {e}")))?;
    Ok(manifest)
}

/// Federation query results computed from the generator's own tables.
fn model_truth(drugs: &DrugKg, pathways: &PathwaysKg, trials: &TrialsKg) -> Vec<ExpectedQuery> {
    let mut protein_by_name: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, p) in pathways.proteins.iter().enumerate().filter(|(_, p)| p.human) {
        protein_by_name.entry(p.name.as_str()).or_default().push(i);
    }
    let mut pathways_of: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(p, pw) in &pathways.participates {
        pathways_of.entry(p).or_default().push(pw);
    }
    let gene_pathways = |gene: &str| -> Vec<&str> {
        let mut out = Vec::new();
        for p in protein_by_name.get(gene).into_iter().flatten() {
            for pw in pathways_of.get(p).into_iter().flatten() {
                out.push(pathways.pathways[*pw].1.as_str());
            }
        }
        out
    };

    let mut metformin = Vec::new();
    for d in drugs.drugs.iter().enumerate().filter(|(_, d)| d.name == "Metformin").map(|(i, _)| i) {
        for &(_, g, _) in drugs.gene_edges.iter().filter(|e| e.0 == d) {
            for pw in gene_pathways(&drugs.genes[g]) {
                metformin.push(vec![drugs.genes[g].clone(), pw.to_string()]);
            }
        }
    }

    let warfarin_drugs = drugs.drugs.iter().filter(|d| d.name == "Warfarin").count();
    let mut warfarin = Vec::new();
    for (iv, _) in trials.interventions.iter().enumerate().filter(|(_, i)| i.0 == "Warfarin") {
        for t in trials.trials.iter().filter(|t| t.interventions.contains(&iv)) {
            for _ in 0..warfarin_drugs {
                warfarin.push(vec![t.nct_id.clone(), t.phase.to_string()]);
            }
        }
    }

    let mut diabetes = Vec::new();
    for &(d, i, _) in &drugs.indication_edges {
        if !drugs.indications[i].1.contains("Diabetes") {
            continue;
        }
        for &(_, g, _) in drugs.gene_edges.iter().filter(|e| e.0 == d) {
            for pw in gene_pathways(&drugs.genes[g]) {
                diabetes.push(vec![drugs.drugs[d].name.clone(), drugs.genes[g].clone(), pw.to_string()]);
            }
        }
    }
    vec![
        expected("metformin_pathways", METFORMIN_QUERY, &["g.gene_name", "pw.name"], finish_rows(metformin, Some(10))),
        expected("warfarin_trials", WARFARIN_QUERY, &["ct.nct_id", "ct.phase"], finish_rows(warfarin, Some(10))),
        expected(
            "diabetes_chain",
            DIABETES_QUERY,
            &["d.name", "g.gene_name", "pw.name"],
            finish_rows(diabetes, None),
        ),
    ]
}

/// Delimited file as header positions plus rows.
struct Table {
    columns: HashMap<String, usize>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Table, String> {
        let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut lines = BufReader::new(file).lines();
        let tab = path.extension().is_some_and(|e| e == "tsv");
        if !tab {
            let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
            let headers = reader.headers().map_err(|e| e.to_string())?.clone();
            let rows = reader
                .records()
                .map(|r| r.map(|r| r.iter().map(String::from).collect()).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            return Ok(Table {
                columns: headers.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect(),
                rows,
            });
        }
        let header = lines.next().ok_or("empty file")?.map_err(|e| e.to_string())?;
        let columns = header.split('\t').enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        let rows = lines
            .map(|l| l.map(|l| l.split('\t').map(String::from).collect()).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        Ok(Table { columns, rows })
    }

    fn col(&self, name: &str) -> usize {
        self.columns[name]
    }

    fn values<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a str> + 'a {
        let c = self.col(name);
        self.rows.iter().map(move |r| r[c].as_str())
    }
}

/// Re-derives label and edge counts, bridges and federation query results
/// from the files under `dir` and compares them with `manifest`.
pub fn check_corpus(dir: impl AsRef<Path>, manifest: &CorpusManifest) -> Result<(), String> {
    let dir = dir.as_ref();
    let read = |kg: &str, file: &str| Table::read(&dir.join(kg).join(file));
    let distinct = |t: &Table, col: &str| t.values(col).collect::<BTreeSet<_>>().len() as u64;
    let mut problems = Vec::new();
    let mut compare = |what: String, expected: u64, found: u64| {
        if expected != found {
            problems.push(format!("{what}: manifest {expected}, files {found}"));
        }
    };

    // Drug interactions.
    let vocab = read(DRUG_KG, "drugbank_vocabulary.csv")?;
    let dgidb = read(DRUG_KG, "dgidb_interactions.tsv")?;
    let sider_se = read(DRUG_KG, "sider_side_effects.tsv")?;
    let sider_ind = read(DRUG_KG, "sider_indications.tsv")?;
    let mut drugs_by_name: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut drugs_by_synonym: HashMap<&str, Vec<usize>> = HashMap::new();
    let (name_col, syn_col) = (vocab.col("name"), vocab.col("synonyms"));
    for (i, row) in vocab.rows.iter().enumerate() {
        drugs_by_name.entry(row[name_col].as_str()).or_default().push(i);
        for s in row[syn_col].split('|') {
            drugs_by_synonym.entry(s).or_default().push(i);
        }
    }
    let by_synonym = |t: &Table| -> u64 {
        t.values("compound").map(|c| drugs_by_synonym.get(c).map_or(0, Vec::len) as u64).sum()
    };
    let drug_kg = manifest.kg(DRUG_KG).ok_or("manifest lacks the drug graph")?;
    let label = |kg: &KgManifest, l: &str| kg.labels.get(l).copied().unwrap_or(0);
    let etype = |kg: &KgManifest, t: &str| kg.edge_types.get(t).copied().unwrap_or(0);
    compare("Drug".into(), label(drug_kg, "Drug"), distinct(&vocab, "drugbank_id"));
    compare("Gene".into(), label(drug_kg, "Gene"), distinct(&dgidb, "gene_name"));
    compare("SideEffect".into(), label(drug_kg, "SideEffect"), distinct(&sider_se, "meddra_id"));
    compare("Indication".into(), label(drug_kg, "Indication"), distinct(&sider_ind, "meddra_id"));
    let iwg: u64 = dgidb.values("drug_name").map(|d| drugs_by_name.get(d).map_or(0, Vec::len) as u64).sum();
    compare("INTERACTS_WITH_GENE".into(), etype(drug_kg, "INTERACTS_WITH_GENE"), iwg);
    compare("HAS_SIDE_EFFECT".into(), etype(drug_kg, "HAS_SIDE_EFFECT"), by_synonym(&sider_se));
    compare("HAS_INDICATION".into(), etype(drug_kg, "HAS_INDICATION"), by_synonym(&sider_ind));

    // Pathways.
    let pw = read(PATHWAYS_KG, "reactome_pathways.tsv")?;
    let reactions = read(PATHWAYS_KG, "reactome_reactions.tsv")?;
    let complexes = read(PATHWAYS_KG, "reactome_complexes.tsv")?;
    let proteins = read(PATHWAYS_KG, "uniprot_proteins.tsv")?;
    let go = read(PATHWAYS_KG, "go_terms.tsv")?;
    let (org, uid, sym) = (proteins.col("organism"), proteins.col("uniprot_id"), proteins.col("gene_symbol"));
    let human: Vec<&Vec<String>> = proteins.rows.iter().filter(|r| r[org] == "Homo sapiens").collect();
    let human_ids: HashSet<&str> = human.iter().map(|r| r[uid].as_str()).collect();
    let ids = |t: &Table, col: &str| -> HashSet<String> { t.values(col).map(String::from).collect() };
    let (pathway_ids, reaction_ids, complex_ids, go_ids) =
        (ids(&pw, "reactome_id"), ids(&reactions, "reactome_id"), ids(&complexes, "reactome_id"), ids(&go, "go_id"));
    let pkg = manifest.kg(PATHWAYS_KG).ok_or("manifest lacks the pathways graph")?;
    compare("Pathway".into(), label(pkg, "Pathway"), pathway_ids.len() as u64);
    compare("Reaction".into(), label(pkg, "Reaction"), reaction_ids.len() as u64);
    compare("Complex".into(), label(pkg, "Complex"), complex_ids.len() as u64);
    compare("Protein".into(), label(pkg, "Protein"), human_ids.len() as u64);
    compare("GOTerm".into(), label(pkg, "GOTerm"), go_ids.len() as u64);
    let count_links = |file: &str, a: &str, left: &dyn Fn(&str) -> bool, b: &str, right: &dyn Fn(&str) -> bool, keep: &dyn Fn(&Table, &[String]) -> bool| -> Result<u64, String> {
        let t = read(PATHWAYS_KG, file)?;
        let (ca, cb) = (t.col(a), t.col(b));
        Ok(t.rows.iter().filter(|r| keep(&t, r) && left(&r[ca]) && right(&r[cb])).count() as u64)
    };
    let is_protein = |s: &str| human_ids.contains(s);
    let is_pathway = |s: &str| pathway_ids.contains(s);
    let is_go = |s: &str| go_ids.contains(s);
    let all = |_: &Table, _: &[String]| true;
    let links = [
        ("CHILD_OF", count_links("reactome_pathway_hierarchy.tsv", "child_id", &is_pathway, "parent_id", &is_pathway, &all)?),
        ("PARTICIPATES_IN", count_links("reactome_participation.tsv", "uniprot_id", &is_protein, "pathway_id", &is_pathway, &all)?),
        (
            "CATALYZES",
            count_links("reactome_catalysis.tsv", "uniprot_id", &is_protein, "reaction_id", &|s| reaction_ids.contains(s), &all)?,
        ),
        (
            "COMPONENT_OF",
            count_links("reactome_complex_components.tsv", "uniprot_id", &is_protein, "complex_id", &|s| complex_ids.contains(s), &all)?,
        ),
        (
            "INTERACTS_WITH",
            count_links("string_interactions.tsv", "protein1", &is_protein, "protein2", &is_protein, &|t, r| {
                r[t.col("combined_score")].parse::<i64>().is_ok_and(|s| s >= 700)
            })?,
        ),
        ("ANNOTATED_WITH", count_links("go_annotations.tsv", "uniprot_id", &is_protein, "go_id", &is_go, &all)?),
        ("IS_A", count_links("go_hierarchy.tsv", "child_id", &is_go, "parent_id", &is_go, &|t, r| r[t.col("relation")] == "is_a")?),
        ("PART_OF", count_links("go_hierarchy.tsv", "child_id", &is_go, "parent_id", &is_go, &|t, r| r[t.col("relation")] == "part_of")?),
        (
            "REGULATES",
            count_links("go_hierarchy.tsv", "child_id", &is_go, "parent_id", &is_go, &|t, r| r[t.col("relation")] == "regulates")?,
        ),
    ];
    for (name, n) in links {
        compare(name.into(), etype(pkg, name), n);
    }

    // Clinical trials.
    let trials = read(TRIALS_KG, "trials.tsv")?;
    let conditions = read(TRIALS_KG, "conditions.tsv")?;
    let interventions = read(TRIALS_KG, "interventions.tsv")?;
    let tkg = manifest.kg(TRIALS_KG).ok_or("manifest lacks the trials graph")?;
    let condition_names = ids(&conditions, "name");
    let intervention_names = ids(&interventions, "name");
    compare("ClinicalTrial".into(), label(tkg, "ClinicalTrial"), distinct(&trials, "nct_id"));
    compare("Condition".into(), label(tkg, "Condition"), condition_names.len() as u64);
    compare("Intervention".into(), label(tkg, "Intervention"), intervention_names.len() as u64);
    compare("Sponsor".into(), label(tkg, "Sponsor"), distinct(&trials, "sponsor"));
    let split_count = |col: &str, known: &HashSet<String>| -> u64 {
        trials
            .values(col)
            .map(|cell| cell.split('|').collect::<BTreeSet<_>>().into_iter().filter(|v| known.contains(*v)).count() as u64)
            .sum()
    };
    compare("STUDIES".into(), etype(tkg, "STUDIES"), split_count("conditions", &condition_names));
    compare("TESTS".into(), etype(tkg, "TESTS"), split_count("interventions", &intervention_names));
    compare("SPONSORED_BY".into(), etype(tkg, "SPONSORED_BY"), trials.rows.len() as u64);

    // Bridges.
    let gene_names: BTreeSet<&str> = dgidb.values("gene_name").collect();
    let protein_names: BTreeSet<&str> = human.iter().map(|r| r[sym].as_str()).collect();
    let gene_bridges: Vec<String> = gene_names.intersection(&protein_names).map(|s| s.to_string()).collect();
    if gene_bridges != manifest.gene_bridges {
        problems.push(format!("gene bridges: manifest {}, files {}", manifest.gene_bridges.len(), gene_bridges.len()));
    }
    let drug_names: BTreeSet<&str> = drugs_by_name.keys().copied().collect();
    let drug_bridges: Vec<String> = intervention_names
        .iter()
        .filter(|n| drug_names.contains(n.as_str()))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if drug_bridges != manifest.drug_trial_bridges {
        problems.push(format!(
            "drug-trial bridges: manifest {}, files {}",
            manifest.drug_trial_bridges.len(),
            drug_bridges.len()
        ));
    }

    // Federation queries by brute force over the files.
    let pathway_name: HashMap<&str, &str> = pw.rows.iter().map(|r| (r[pw.col("reactome_id")].as_str(), r[pw.col("name")].as_str())).collect();
    let participation = read(PATHWAYS_KG, "reactome_participation.tsv")?;
    let mut pathways_of_symbol: HashMap<&str, Vec<&str>> = HashMap::new();
    let symbol_of: HashMap<&str, &str> = human.iter().map(|r| (r[uid].as_str(), r[sym].as_str())).collect();
    for r in &participation.rows {
        let (p, w) = (&r[participation.col("uniprot_id")], &r[participation.col("pathway_id")]);
        if let (Some(s), Some(n)) = (symbol_of.get(p.as_str()), pathway_name.get(w.as_str())) {
            pathways_of_symbol.entry(s).or_default().push(n);
        }
    }
    let genes_of = |drug: &str| -> Vec<&str> {
        let (dc, gc) = (dgidb.col("drug_name"), dgidb.col("gene_name"));
        dgidb.rows.iter().filter(|r| r[dc] == drug).map(|r| r[gc].as_str()).collect()
    };
    let mut metformin = Vec::new();
    for _ in drugs_by_name.get("Metformin").into_iter().flatten() {
        for g in genes_of("Metformin") {
            for w in pathways_of_symbol.get(g).into_iter().flatten() {
                metformin.push(vec![g.to_string(), w.to_string()]);
            }
        }
    }
    let warfarin_drugs = drugs_by_name.get("Warfarin").map_or(0, Vec::len);
    let mut warfarin = Vec::new();
    if intervention_names.contains("Warfarin") {
        let (nc, pc, ic) = (trials.col("nct_id"), trials.col("phase"), trials.col("interventions"));
        for r in trials.rows.iter().filter(|r| r[ic].split('|').any(|i| i == "Warfarin")) {
            for _ in 0..warfarin_drugs {
                warfarin.push(vec![r[nc].clone(), r[pc].clone()]);
            }
        }
    }
    let mut diabetes = Vec::new();
    let (cc, nc) = (sider_ind.col("compound"), sider_ind.col("indication_name"));
    for r in sider_ind.rows.iter().filter(|r| r[nc].contains("Diabetes")) {
        for &d in drugs_by_synonym.get(r[cc].as_str()).into_iter().flatten() {
            let name = &vocab.rows[d][name_col];
            for g in genes_of(name) {
                for w in pathways_of_symbol.get(g).into_iter().flatten() {
                    diabetes.push(vec![name.clone(), g.to_string(), w.to_string()]);
                }
            }
        }
    }
    for (name, rows) in [
        ("metformin_pathways", finish_rows(metformin, Some(10))),
        ("warfarin_trials", finish_rows(warfarin, Some(10))),
        ("diabetes_chain", finish_rows(diabetes, None)),
    ] {
        match manifest.query(name) {
            Some(q) if q.rows == rows => {}
            Some(q) => problems.push(format!("{name}: manifest {} rows, files give {}", q.rows.len(), rows.len())),
            None => problems.push(format!("manifest lacks query {name}")),
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems.join("; "))
    }
}
