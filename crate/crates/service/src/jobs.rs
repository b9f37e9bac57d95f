//! Job records and their spool directory.
//!
//! Finished jobs are written as `<id>.json` plus `<id>.zip` so a restarted
//! service can still serve them.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use tactmap_core::{ArchiveManifest, JobRequest};
use uuid::Uuid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Running,
    Done { manifest: ArchiveManifest },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_id: Uuid,
    pub request: JobRequest,
    #[serde(flatten)]
    pub state: JobState,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

#[derive(Debug, PartialEq, Eq)]
pub enum ArchiveError {
    Unknown,
    NotReady,
}

pub struct JobStore {
    spool: PathBuf,
    expiry: Duration,
    jobs: Mutex<HashMap<Uuid, JobRecord>>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl JobStore {
    /// Opens the spool, picking up finished jobs left by an earlier run.
    pub fn open(spool: &Path, expiry: Duration) -> std::io::Result<Self> {
        std::fs::create_dir_all(spool)?;
        let mut jobs = HashMap::new();
        for entry in std::fs::read_dir(spool)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let Ok(text) = std::fs::read_to_string(&path) else { continue };
            match serde_json::from_str::<JobRecord>(&text) {
                Ok(rec) if matches!(rec.state, JobState::Done { .. } | JobState::Failed { .. }) => {
                    jobs.insert(rec.job_id, rec);
                }
                _ => tracing::warn!(path = %path.display(), "ignoring unreadable job record"),
            }
        }
        let store = Self {
            spool: spool.to_owned(),
            expiry,
            jobs: Mutex::new(jobs),
        };
        store.purge_expired();
        Ok(store)
    }

    fn archive_path(&self, id: Uuid) -> PathBuf {
        self.spool.join(format!("{id}.zip"))
    }

    fn record_path(&self, id: Uuid) -> PathBuf {
        self.spool.join(format!("{id}.json"))
    }

    pub fn create(&self, request: JobRequest) -> JobRecord {
        let rec = JobRecord {
            job_id: Uuid::new_v4(),
            request,
            state: JobState::Pending,
            created: now(),
        };
        self.jobs.lock().unwrap().insert(rec.job_id, rec.clone());
        rec
    }

    /// Pending to Running. False if the job is gone or already started.
    pub fn start(&self, id: Uuid) -> bool {
        let mut jobs = self.jobs.lock().unwrap();
        match jobs.get_mut(&id) {
            Some(rec) if rec.state == JobState::Pending => {
                rec.state = JobState::Running;
                true
            }
            _ => false,
        }
    }

    /// Running to Done or Failed. The archive is on disk before the state
    /// says Done.
    pub fn finish(&self, id: Uuid, result: Result<(ArchiveManifest, Vec<u8>), String>) {
        let state = match result {
            Ok((manifest, archive)) => match write_atomic(&self.archive_path(id), &archive) {
                Ok(()) => JobState::Done { manifest },
                Err(e) => JobState::Failed {
                    reason: format!("spool: {e}"),
                },
            },
            Err(reason) => JobState::Failed { reason },
        };
        let mut jobs = self.jobs.lock().unwrap();
        let Some(rec) = jobs.get_mut(&id) else { return };
        if rec.state != JobState::Running {
            return;
        }
        rec.state = state;
        let json = serde_json::to_vec_pretty(rec).expect("record serializes");
        if let Err(e) = write_atomic(&self.record_path(id), &json) {
            tracing::warn!(%id, error = %e, "could not persist job record");
        }
    }

    pub fn get(&self, id: Uuid) -> Option<JobRecord> {
        let rec = self.jobs.lock().unwrap().get(&id).cloned()?;
        (!self.expired(&rec, now())).then_some(rec)
    }

    pub fn archive(&self, id: Uuid) -> Result<Vec<u8>, ArchiveError> {
        match self.get(id).map(|r| r.state) {
            None => Err(ArchiveError::Unknown),
            Some(JobState::Done { .. }) => std::fs::read(self.archive_path(id)).map_err(|_| ArchiveError::Unknown),
            Some(_) => Err(ArchiveError::NotReady),
        }
    }

    fn expired(&self, rec: &JobRecord, at: u64) -> bool {
        at.saturating_sub(rec.created) >= self.expiry.as_secs()
    }

    /// Drops expired jobs and their spool files. Returns how many went.
    pub fn purge_expired(&self) -> usize {
        let at = now();
        let mut jobs = self.jobs.lock().unwrap();
        let gone: Vec<Uuid> = jobs.values().filter(|r| self.expired(r, at)).map(|r| r.job_id).collect();
        for id in &gone {
            jobs.remove(id);
            let _ = std::fs::remove_file(self.archive_path(*id));
            let _ = std::fs::remove_file(self.record_path(*id));
        }
        gone.len()
    }
}

fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, data)?;
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tactmap_core::{Selection, SheetId};

    fn request() -> JobRequest {
        JobRequest::new("map.osm", Selection::Sheets(vec![SheetId::new(0, 0)]))
    }

    #[test]
    fn transitions() {
        let dir = tempfile::tempdir().unwrap();
        let store = JobStore::open(dir.path(), Duration::from_secs(3600)).unwrap();
        let rec = store.create(request());
        assert_eq!(store.archive(rec.job_id), Err(ArchiveError::NotReady));
        // Finishing a job that never started is ignored.
        store.finish(rec.job_id, Err("x".into()));
        assert_eq!(store.get(rec.job_id).unwrap().state, JobState::Pending);
        assert!(store.start(rec.job_id));
        assert!(!store.start(rec.job_id));
        store.finish(rec.job_id, Ok((ArchiveManifest::default(), b"zip".to_vec())));
        assert!(matches!(store.get(rec.job_id).unwrap().state, JobState::Done { .. }));
        assert_eq!(store.archive(rec.job_id).unwrap(), b"zip");
        assert_eq!(store.archive(Uuid::nil()), Err(ArchiveError::Unknown));
    }

    #[test]
    fn reopen_and_expiry() {
        let dir = tempfile::tempdir().unwrap();
        let id = {
            let store = JobStore::open(dir.path(), Duration::from_secs(3600)).unwrap();
            let rec = store.create(request());
            store.start(rec.job_id);
            store.finish(rec.job_id, Ok((ArchiveManifest::default(), b"zip".to_vec())));
            let other = store.create(request());
            store.start(other.job_id);
            rec.job_id
        };
        let store = JobStore::open(dir.path(), Duration::from_secs(3600)).unwrap();
        assert_eq!(store.archive(id).unwrap(), b"zip");
        assert_eq!(store.jobs.lock().unwrap().len(), 1);

        let store = JobStore::open(dir.path(), Duration::ZERO).unwrap();
        assert!(store.get(id).is_none());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn record_json_shape() {
        let rec = JobRecord {
            job_id: Uuid::nil(),
            request: request(),
            state: JobState::Failed { reason: "boom".into() },
            created: 7,
        };
        let v = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["state"], "failed");
        assert_eq!(v["reason"], "boom");
        assert_eq!(serde_json::from_value::<JobRecord>(v).unwrap(), rec);
    }
}
