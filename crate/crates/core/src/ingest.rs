//! Parsers for the three tabular dataset families.
//!
//! Every parser takes the full file content, sniffs the delimiter from the
//! header line and applies it to every row. Failures carry the 1-based line
//! number (the header is line 1) and, where it makes sense, the 1-based
//! column.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GENE_ID_COLUMN: &str = "geneEntrezId";
pub const GENE_NAME_COLUMN: &str = "geneName";
pub const SOURCE_COLUMN: &str = "SourceGeneId";
pub const TARGET_COLUMN: &str = "TargetGeneId";
pub const SCORE_COLUMN: &str = "score";
pub const GENES_COLUMN: &str = "Genes";
pub const DISEASE_COLUMN: &str = "Disease/Trait";
pub const P_VALUE_COLUMN: &str = "p-Value";

/// Entrez gene identifier. Always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneId(pub u64);

impl fmt::Display for GeneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Position of a cluster column in the cluster table (0-based, header order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub usize);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Tab,
    Comma,
}

impl Delimiter {
    pub fn as_byte(self) -> u8 {
        match self {
            Delimiter::Tab => b'\t',
            Delimiter::Comma => b',',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringKind {
    Hard,
    Soft,
}

impl fmt::Display for ClusteringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusteringKind::Hard => "hard",
            ClusteringKind::Soft => "soft",
        })
    }
}

/// Where in the input a parse error happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Location {
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("header line contains neither a tab nor a comma")]
    NoDelimiter,
    #[error("missing required column `{0}`")]
    MissingHeader(String),
    #[error("line {line}, column {column} (`{name}`): {reason}: {value:?}")]
    BadNumber {
        line: usize,
        column: usize,
        name: String,
        value: String,
        reason: &'static str,
    },
    #[error("line {line}, column {column}: invalid gene id {value:?}")]
    BadGeneId {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("line {line}, column {column} (`{name}`): missing value")]
    MissingValue {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}: duplicate gene id {id}")]
    DuplicateGene { line: usize, id: GeneId },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("dataset has no data rows")]
    EmptyDataset,
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::NoDelimiter => "NO_DELIMITER",
            IngestError::MissingHeader(_) => "MISSING_HEADER",
            IngestError::BadNumber { .. } => "BAD_NUMBER",
            IngestError::BadGeneId { .. } => "BAD_GENE_ID",
            IngestError::MissingValue { .. } => "MISSING_VALUE",
            IngestError::DuplicateGene { .. } => "DUPLICATE_GENE",
            IngestError::FieldCount { .. } => "FIELD_COUNT",
            IngestError::Malformed { .. } => "MALFORMED",
            IngestError::EmptyDataset => "EMPTY_DATASET",
        }
    }

    pub fn location(&self) -> Option<Location> {
        let at = |line, column| Some(Location { line, column });
        match *self {
            IngestError::NoDelimiter | IngestError::MissingHeader(_) => at(1, None),
            IngestError::BadNumber { line, column, .. }
            | IngestError::BadGeneId { line, column, .. }
            | IngestError::MissingValue { line, column, .. } => at(line, Some(column)),
            IngestError::DuplicateGene { line, .. }
            | IngestError::FieldCount { line, .. }
            | IngestError::Malformed { line, .. } => at(line, None),
            IngestError::EmptyDataset => None,
        }
    }
}

pub fn detect_delimiter(first_line: &str) -> Result<Delimiter, IngestError> {
    if first_line.contains('\t') {
        Ok(Delimiter::Tab)
    } else if first_line.contains(',') {
        Ok(Delimiter::Comma)
    } else {
        Err(IngestError::NoDelimiter)
    }
}

struct Row {
    line: usize,
    fields: Vec<String>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Row>,
}

impl Table {
    fn column(&self, name: &str) -> Result<usize, IngestError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingHeader(name.to_string()))
    }

    fn column_ignore_case(&self, name: &str) -> Result<usize, IngestError> {
        self.header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| IngestError::MissingHeader(name.to_string()))
    }
}

fn read_table(content: &str) -> Result<Table, IngestError> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    let first_line = content.lines().next().unwrap_or("");
    if first_line.trim().is_empty() {
        return Err(IngestError::EmptyDataset);
    }
    let delimiter = detect_delimiter(first_line)?;

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter.as_byte())
        .has_headers(false)
        .flexible(true)
        .quoting(delimiter == Delimiter::Comma)
        .from_reader(content.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line_hint = reader.position().line() as usize;
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(err) => {
                let line = err
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or(line_hint);
                return Err(IngestError::Malformed {
                    line,
                    message: err.to_string(),
                });
            }
        }
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(line_hint);
        let fields: Vec<String> = record.iter().map(|f| f.trim().to_string()).collect();
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.iter().all(|f| f.is_empty()) {
                    continue;
                }
                if fields.len() != h.len() {
                    return Err(IngestError::FieldCount {
                        line,
                        expected: h.len(),
                        found: fields.len(),
                    });
                }
                rows.push(Row { line, fields });
            }
        }
    }
    let header = header.ok_or(IngestError::EmptyDataset)?;
    Ok(Table { header, rows })
}

fn parse_gene_id(value: &str, line: usize, column: usize) -> Result<GeneId, IngestError> {
    match value.parse::<u64>() {
        Ok(id) if id > 0 => Ok(GeneId(id)),
        _ => Err(IngestError::BadGeneId {
            line,
            column,
            value: value.to_string(),
        }),
    }
}

fn bad_number(table: &Table, line: usize, column: usize, value: &str, reason: &'static str) -> IngestError {
    IngestError::BadNumber {
        line,
        column: column + 1,
        name: table.header[column].clone(),
        value: value.to_string(),
        reason,
    }
}

fn parse_unit(table: &Table, row: &Row, column: usize) -> Result<f64, IngestError> {
    let value = &row.fields[column];
    let parsed: f64 = value
        .parse()
        .map_err(|_| bad_number(table, row.line, column, value, "not a number"))?;
    if !(0.0..=1.0).contains(&parsed) {
        return Err(bad_number(table, row.line, column, value, "outside [0, 1]"));
    }
    Ok(parsed)
}

fn require_value<'a>(table: &Table, row: &'a Row, column: usize) -> Result<&'a str, IngestError> {
    let value = row.fields[column].as_str();
    if value.is_empty() {
        return Err(IngestError::MissingValue {
            line: row.line,
            column: column + 1,
            name: table.header[column].clone(),
        });
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// Cluster table

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gene {
    pub id: GeneId,
    pub name: String,
}

/// A gene's association `a_c` with one cluster. Only positive values are stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterMembership {
    pub gene: GeneId,
    pub cluster: ClusterId,
    pub association: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDataset {
    genes: Vec<Gene>,
    clusters: Vec<String>,
    kind: ClusteringKind,
    // Grouped by gene (file order), clusters ascending within a gene.
    memberships: Vec<ClusterMembership>,
    gene_spans: Vec<(usize, usize)>,
    gene_index: HashMap<GeneId, usize>,
    // Gene indices per cluster, ascending.
    cluster_members: Vec<Vec<usize>>,
}

impl ClusterDataset {
    fn new(
        genes: Vec<Gene>,
        clusters: Vec<String>,
        kind: ClusteringKind,
        memberships: Vec<ClusterMembership>,
    ) -> Self {
        let gene_index: HashMap<GeneId, usize> =
            genes.iter().enumerate().map(|(i, g)| (g.id, i)).collect();
        let mut gene_spans = vec![(0, 0); genes.len()];
        let mut cluster_members = vec![Vec::new(); clusters.len()];
        let mut start = 0;
        while start < memberships.len() {
            let gene = memberships[start].gene;
            let mut end = start;
            while end < memberships.len() && memberships[end].gene == gene {
                end += 1;
            }
            let gi = gene_index[&gene];
            gene_spans[gi] = (start, end);
            for m in &memberships[start..end] {
                cluster_members[m.cluster.0].push(gi);
            }
            start = end;
        }
        ClusterDataset {
            genes,
            clusters,
            kind,
            memberships,
            gene_spans,
            gene_index,
            cluster_members,
        }
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn gene(&self, id: GeneId) -> Option<&Gene> {
        self.gene_index.get(&id).map(|&i| &self.genes[i])
    }

    pub fn gene_position(&self, id: GeneId) -> Option<usize> {
        self.gene_index.get(&id).copied()
    }

    pub fn contains_gene(&self, id: GeneId) -> bool {
        self.gene_index.contains_key(&id)
    }

    pub fn cluster_names(&self) -> &[String] {
        &self.clusters
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster_ids(&self) -> impl Iterator<Item = ClusterId> {
        (0..self.clusters.len()).map(ClusterId)
    }

    pub fn cluster_name(&self, cluster: ClusterId) -> Option<&str> {
        self.clusters.get(cluster.0).map(String::as_str)
    }

    /// Resolves a user-supplied cluster reference: a numeric id first, then an exact name.
    pub fn resolve_cluster(&self, reference: &str) -> Option<ClusterId> {
        let reference = reference.trim();
        if let Ok(id) = reference.parse::<usize>() {
            if id < self.clusters.len() {
                return Some(ClusterId(id));
            }
        }
        self.clusters
            .iter()
            .position(|c| c == reference)
            .map(ClusterId)
    }

    pub fn kind(&self) -> ClusteringKind {
        self.kind
    }

    pub fn memberships(&self) -> &[ClusterMembership] {
        &self.memberships
    }

    /// Memberships of the gene at `position`, clusters ascending.
    pub fn gene_memberships(&self, position: usize) -> &[ClusterMembership] {
        let (start, end) = self.gene_spans[position];
        &self.memberships[start..end]
    }

    pub fn memberships_of(&self, id: GeneId) -> &[ClusterMembership] {
        match self.gene_index.get(&id) {
            Some(&i) => self.gene_memberships(i),
            None => &[],
        }
    }

    /// Gene positions belonging to `cluster`, ascending.
    pub fn cluster_members(&self, cluster: ClusterId) -> &[usize] {
        &self.cluster_members[cluster.0]
    }

    pub fn association(&self, gene_position: usize, cluster: ClusterId) -> Option<f64> {
        self.gene_memberships(gene_position)
            .iter()
            .find(|m| m.cluster == cluster)
            .map(|m| m.association)
    }

    /// Writes the dataset back in comma-separated form. Hard datasets are
    /// written as 0/1 cells so that re-parsing recomputes the same fractions.
    pub fn to_table(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec![GENE_ID_COLUMN.to_string(), GENE_NAME_COLUMN.to_string()];
        header.extend(self.clusters.iter().cloned());
        writer.write_record(&header).expect("in-memory write");
        for (i, gene) in self.genes.iter().enumerate() {
            let mut cells = vec!["0".to_string(); self.clusters.len()];
            for m in self.gene_memberships(i) {
                cells[m.cluster.0] = match self.kind {
                    ClusteringKind::Hard => "1".to_string(),
                    ClusteringKind::Soft => m.association.to_string(),
                };
            }
            let mut record = vec![gene.id.to_string(), gene.name.clone()];
            record.extend(cells);
            writer.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

pub fn parse_cluster_table(content: &str) -> Result<ClusterDataset, IngestError> {
    let table = read_table(content)?;
    let id_col = table.column(GENE_ID_COLUMN)?;
    let name_col = table.column(GENE_NAME_COLUMN)?;
    let cluster_cols: Vec<usize> = (0..table.header.len())
        .filter(|&c| c != id_col && c != name_col)
        .collect();
    if cluster_cols.is_empty() {
        return Err(IngestError::MissingHeader("<cluster columns>".to_string()));
    }
    if table.rows.is_empty() {
        return Err(IngestError::EmptyDataset);
    }

    let clusters: Vec<String> = cluster_cols.iter().map(|&c| table.header[c].clone()).collect();
    let mut genes = Vec::with_capacity(table.rows.len());
    let mut seen = HashMap::new();
    let mut raw: Vec<Vec<(ClusterId, f64)>> = Vec::with_capacity(table.rows.len());
    let mut hard = true;

    for row in &table.rows {
        let id = parse_gene_id(&row.fields[id_col], row.line, id_col + 1)?;
        if seen.insert(id, row.line).is_some() {
            return Err(IngestError::DuplicateGene { line: row.line, id });
        }
        let name = require_value(&table, row, name_col)?.to_string();
        let mut cells = Vec::new();
        for (ci, &col) in cluster_cols.iter().enumerate() {
            if row.fields[col].is_empty() {
                continue;
            }
            let value = parse_unit(&table, row, col)?;
            if value != 0.0 && value != 1.0 {
                hard = false;
            }
            if value > 0.0 {
                cells.push((ClusterId(ci), value));
            }
        }
        genes.push(Gene { id, name });
        raw.push(cells);
    }

    let kind = if hard {
        ClusteringKind::Hard
    } else {
        ClusteringKind::Soft
    };
    let mut memberships = Vec::new();
    for (gene, cells) in genes.iter().zip(&raw) {
        let share = 1.0 / cells.len() as f64;
        for &(cluster, value) in cells {
            memberships.push(ClusterMembership {
                gene: gene.id,
                cluster,
                association: match kind {
                    ClusteringKind::Hard => share,
                    ClusteringKind::Soft => value,
                },
            });
        }
    }
    Ok(ClusterDataset::new(genes, clusters, kind, memberships))
}

// ---------------------------------------------------------------------------
// Interaction table

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interaction {
    pub source: GeneId,
    pub target: GeneId,
    pub score: f64,
}

impl Interaction {
    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }

    /// Unordered endpoint pair, smaller id first.
    pub fn key(&self) -> (GeneId, GeneId) {
        if self.source <= self.target {
            (self.source, self.target)
        } else {
            (self.target, self.source)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InteractionDataset {
    edges: Vec<Interaction>,
    rows: usize,
}

impl InteractionDataset {
    pub fn edges(&self) -> &[Interaction] {
        &self.edges
    }

    /// Number of data rows before duplicate collapse.
    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn self_loops(&self) -> impl Iterator<Item = &Interaction> {
        self.edges.iter().filter(|e| e.is_self_loop())
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{SOURCE_COLUMN},{TARGET_COLUMN},{SCORE_COLUMN}\n");
        for e in &self.edges {
            out.push_str(&format!("{},{},{}\n", e.source, e.target, e.score));
        }
        out
    }
}

pub fn parse_interaction_table(content: &str) -> Result<InteractionDataset, IngestError> {
    let table = read_table(content)?;
    let source_col = table.column(SOURCE_COLUMN)?;
    let target_col = table.column(TARGET_COLUMN)?;
    let score_col = table.column(SCORE_COLUMN)?;
    if table.rows.is_empty() {
        return Err(IngestError::EmptyDataset);
    }

    let mut edges: Vec<Interaction> = Vec::new();
    let mut by_pair: HashMap<(GeneId, GeneId), usize> = HashMap::new();
    for row in &table.rows {
        let source = parse_gene_id(&row.fields[source_col], row.line, source_col + 1)?;
        let target = parse_gene_id(&row.fields[target_col], row.line, target_col + 1)?;
        let score = parse_unit(&table, row, score_col)?;
        let edge = Interaction {
            source,
            target,
            score,
        };
        match by_pair.get(&edge.key()) {
            Some(&i) => {
                if score > edges[i].score {
                    edges[i].score = score;
                }
            }
            None => {
                by_pair.insert(edge.key(), edges.len());
                edges.push(edge);
            }
        }
    }
    Ok(InteractionDataset {
        edges,
        rows: table.rows.len(),
    })
}

// ---------------------------------------------------------------------------
// Disease table

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiseaseRecord {
    pub disease: String,
    pub gene_name: String,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiseaseDataset {
    records: Vec<DiseaseRecord>,
}

/// Comparison key for disease labels.
pub fn disease_key(label: &str) -> String {
    label.trim().to_lowercase()
}

impl DiseaseDataset {
    pub fn records(&self) -> &[DiseaseRecord] {
        &self.records
    }

    pub fn records_for<'a>(&'a self, disease: &str) -> impl Iterator<Item = &'a DiseaseRecord> + 'a {
        let key = disease_key(disease);
        self.records
            .iter()
            .filter(move |r| disease_key(&r.disease) == key)
    }

    /// Distinct diseases with their record counts, most records first, ties by label.
    /// The label reported is the first spelling seen in the file.
    pub fn disease_counts(&self) -> Vec<(String, usize)> {
        let mut order: Vec<(String, usize)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for r in &self.records {
            let key = disease_key(&r.disease);
            match index.get(&key) {
                Some(&i) => order[i].1 += 1,
                None => {
                    index.insert(key, order.len());
                    order.push((r.disease.clone(), 1));
                }
            }
        }
        order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        order
    }

    pub fn to_table(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record([DISEASE_COLUMN, GENES_COLUMN, P_VALUE_COLUMN])
            .expect("in-memory write");
        for r in &self.records {
            writer
                .write_record([r.disease.as_str(), r.gene_name.as_str(), &r.p_value.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

pub fn parse_disease_table(content: &str) -> Result<DiseaseDataset, IngestError> {
    let table = read_table(content)?;
    let genes_col = table.column_ignore_case(GENES_COLUMN)?;
    let disease_col = table.column_ignore_case(DISEASE_COLUMN)?;
    let p_col = table.column_ignore_case(P_VALUE_COLUMN)?;
    if table.rows.is_empty() {
        return Err(IngestError::EmptyDataset);
    }

    let mut records = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let disease = require_value(&table, row, disease_col)?.to_string();
        let gene_name = require_value(&table, row, genes_col)?.to_string();
        let raw = require_value(&table, row, p_col)?;
        let p_value: f64 = raw
            .parse()
            .map_err(|_| bad_number(&table, row.line, p_col, raw, "not a number"))?;
        if !(p_value > 0.0 && p_value <= 1.0) {
            return Err(bad_number(&table, row.line, p_col, raw, "p-value outside (0, 1]"));
        }
        records.push(DiseaseRecord {
            disease,
            gene_name,
            p_value,
        });
    }
    Ok(DiseaseDataset { records })
}
