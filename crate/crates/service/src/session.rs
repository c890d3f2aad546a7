use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock, RwLock};
use std::time::SystemTime;

use geneweave_core::ingest::{ClusterDataset, DiseaseDataset, InteractionDataset};

use crate::error::ApiError;

pub type Payload = Arc<[u8]>;

/// Drawn seeds stay below 2^53 so they survive a round trip through JS numbers.
pub const SEED_MASK: u64 = (1 << 53) - 1;

pub fn draw_seed() -> u64 {
    rand::random::<u64>() & SEED_MASK
}

/// The loaded datasets, shared immutably between readers.
#[derive(Debug, Clone, Default)]
pub struct Datasets {
    pub cluster: Option<Arc<ClusterDataset>>,
    pub interaction: Option<Arc<InteractionDataset>>,
    pub disease: Option<Arc<DiseaseDataset>>,
}

impl Datasets {
    pub fn cluster(&self) -> Result<&ClusterDataset, ApiError> {
        self.cluster.as_deref().ok_or_else(|| ApiError::not_loaded("cluster"))
    }

    pub fn interaction(&self) -> Result<&InteractionDataset, ApiError> {
        self.interaction.as_deref().ok_or_else(|| ApiError::not_loaded("interaction"))
    }

    pub fn disease(&self) -> Result<&DiseaseDataset, ApiError> {
        self.disease.as_deref().ok_or_else(|| ApiError::not_loaded("disease"))
    }
}

type Cell = Arc<OnceLock<Result<Payload, ApiError>>>;

/// Memo table where concurrent requests for one key share a single computation.
pub struct Memo<K> {
    cells: Mutex<HashMap<K, Cell>>,
}

impl<K> Default for Memo<K> {
    fn default() -> Self {
        Memo {
            cells: Mutex::new(HashMap::new()),
        }
    }
}

impl<K: Eq + Hash> Memo<K> {
    pub fn get_or_compute(&self, key: K, compute: impl FnOnce() -> Result<Payload, ApiError>) -> Result<Payload, ApiError> {
        let cell = {
            let mut cells = self.cells.lock().unwrap_or_else(|e| e.into_inner());
            cells.entry(key).or_default().clone()
        };
        cell.get_or_init(compute).clone()
    }

    pub fn len(&self) -> usize {
        self.cells.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One immutable dataset state plus the layouts derived from it. Replacing
/// any dataset creates a new generation, which drops every cache with it.
#[derive(Default)]
pub struct Generation {
    pub number: u64,
    pub data: Datasets,
    /// keyed by (min_overlap, layout seed)
    pub cluster_views: Memo<(usize, u64)>,
    /// keyed by (cluster, layout seed)
    pub gene_views: Memo<(usize, u64)>,
}

pub struct Session {
    pub id: String,
    pub seed: u64,
    pub created_at: SystemTime,
    last_access: Mutex<SystemTime>,
    current: RwLock<Arc<Generation>>,
}

impl Session {
    fn new(id: String, seed: u64, data: Datasets) -> Self {
        let now = SystemTime::now();
        Session {
            id,
            seed,
            created_at: now,
            last_access: Mutex::new(now),
            current: RwLock::new(Arc::new(Generation {
                data,
                ..Generation::default()
            })),
        }
    }

    pub fn touch(&self) {
        *self.last_access.lock().unwrap_or_else(|e| e.into_inner()) = SystemTime::now();
    }

    pub fn last_access(&self) -> SystemTime {
        *self.last_access.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// The generation a reader works against for the whole request.
    pub fn snapshot(&self) -> Arc<Generation> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Swap in a new dataset state under exclusive access.
    pub fn update(&self, change: impl FnOnce(&mut Datasets)) -> Arc<Generation> {
        let mut current = self.current.write().unwrap_or_else(|e| e.into_inner());
        let mut data = current.data.clone();
        change(&mut data);
        let next = Arc::new(Generation {
            number: current.number + 1,
            data,
            ..Generation::default()
        });
        *current = next.clone();
        next
    }
}

#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl SessionStore {
    pub fn create(&self, seed: Option<u64>, data: Datasets) -> Arc<Session> {
        let seed = seed.unwrap_or_else(draw_seed);
        let mut sessions = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        let id = loop {
            let id = format!("{:016x}", rand::random::<u64>());
            if !sessions.contains_key(&id) {
                break id;
            }
        };
        let session = Arc::new(Session::new(id.clone(), seed, data));
        sessions.insert(id, session.clone());
        session
    }

    pub fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let session = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))?;
        session.touch();
        Ok(session)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
