use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use consensus_core::metrics::{DescriptionVector, SimilarityKind};
use consensus_core::study::Proposal;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::RwLock;

use crate::store::{Aggregation, Store, SubmitError, Submission};

pub type SharedStore = Arc<RwLock<Store>>;

pub const JSON_CONTENT_TYPE: &str = "application/json; charset=utf-8";

pub(crate) fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("response serializes");
    (status, [(header::CONTENT_TYPE, JSON_CONTENT_TYPE)], bytes).into_response()
}

pub(crate) fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    json_response(status, &json!({ "error": message.into() }))
}

pub async fn get_taxonomy(State(store): State<SharedStore>) -> Response {
    json_response(StatusCode::OK, store.read().await.taxonomy())
}

#[derive(Debug, Default, Deserialize)]
pub struct ProposalFilter {
    pub referent_id: Option<String>,
    pub annotator_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ProposalSummary {
    pub id: String,
    pub referent_id: String,
    pub participant_id: String,
    pub media_ref: Option<String>,
    /// Whether the requesting annotator has annotated it; with no annotator
    /// given, whether anyone has.
    pub annotated: bool,
    pub annotators: Vec<String>,
}

fn summarize(store: &Store, p: &Proposal, annotator: Option<&str>) -> ProposalSummary {
    let annotators: Vec<String> = store.annotators_for(&p.id).into_iter().map(String::from).collect();
    let annotated = match annotator {
        Some(a) => annotators.iter().any(|x| x == a),
        None => !annotators.is_empty(),
    };
    ProposalSummary {
        id: p.id.clone(),
        referent_id: p.referent_id.clone(),
        participant_id: p.participant_id.clone(),
        media_ref: p.media_ref.clone(),
        annotated,
        annotators,
    }
}

pub async fn list_proposals(State(store): State<SharedStore>, Query(filter): Query<ProposalFilter>) -> Response {
    let store = store.read().await;
    let ds = store.dataset();
    if let Some(rid) = &filter.referent_id {
        if ds.referent(rid).is_none() {
            return error_response(StatusCode::NOT_FOUND, format!("unknown referent '{rid}'"));
        }
    }
    let out: Vec<ProposalSummary> = ds
        .proposals()
        .iter()
        .filter(|p| filter.referent_id.as_ref().is_none_or(|r| &p.referent_id == r))
        .map(|p| summarize(&store, p, filter.annotator_id.as_deref()))
        .collect();
    json_response(StatusCode::OK, &out)
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReferentProgress {
    pub id: String,
    pub label: String,
    pub total: usize,
    pub annotated: usize,
}

pub async fn list_referents(State(store): State<SharedStore>, Query(filter): Query<ProposalFilter>) -> Response {
    let store = store.read().await;
    let ds = store.dataset();
    let out: Vec<ReferentProgress> = ds
        .referents()
        .iter()
        .map(|r| {
            let summaries: Vec<_> = ds
                .proposals_for(&r.id)
                .map(|p| summarize(&store, p, filter.annotator_id.as_deref()))
                .collect();
            ReferentProgress {
                id: r.id.clone(),
                label: r.label.clone(),
                total: summaries.len(),
                annotated: summaries.iter().filter(|s| s.annotated).count(),
            }
        })
        .collect();
    json_response(StatusCode::OK, &out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmissionBody {
    pub annotator_id: String,
    pub descriptor_ids: Vec<String>,
    #[serde(default)]
    pub submitted_at: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StoredAnnotation {
    pub proposal_id: String,
    pub annotator_id: String,
    pub descriptor_ids: Vec<String>,
    pub vector: DescriptionVector,
    pub submitted_at: String,
}

impl StoredAnnotation {
    fn new(s: &Submission, vector: &DescriptionVector) -> Self {
        Self {
            proposal_id: s.proposal_id.clone(),
            annotator_id: s.annotator_id.clone(),
            descriptor_ids: s.descriptor_ids.clone(),
            vector: vector.clone(),
            submitted_at: s.submitted_at.clone(),
        }
    }
}

pub async fn put_annotation(
    State(store): State<SharedStore>,
    Path(proposal_id): Path<String>,
    body: Bytes,
) -> Response {
    let mut store = store.write().await;
    if store.dataset().proposal(&proposal_id).is_none() {
        return error_response(StatusCode::NOT_FOUND, format!("unknown proposal '{proposal_id}'"));
    }
    let body: SubmissionBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("malformed body: {e}")),
    };
    match store.submit(&proposal_id, &body.annotator_id, &body.descriptor_ids, body.submitted_at) {
        Ok((s, v)) => json_response(StatusCode::OK, &StoredAnnotation::new(&s, &v)),
        Err(SubmitError::UnknownProposal(p)) => {
            error_response(StatusCode::NOT_FOUND, format!("unknown proposal '{p}'"))
        }
        Err(SubmitError::UnknownDescriptors(bad)) => json_response(
            StatusCode::UNPROCESSABLE_ENTITY,
            &json!({
                "error": format!("unknown descriptor ids: {}", bad.join(", ")),
                "unknown_descriptor_ids": bad,
            }),
        ),
        Err(e @ SubmitError::Invalid(_)) => error_response(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e @ SubmitError::Io(_)) => {
            tracing::error!(error = %e, "journal write failed");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct AnnotatorQuery {
    pub annotator_id: Option<String>,
}

pub async fn get_annotation(
    State(store): State<SharedStore>,
    Path(proposal_id): Path<String>,
    Query(q): Query<AnnotatorQuery>,
) -> Response {
    let store = store.read().await;
    if store.dataset().proposal(&proposal_id).is_none() {
        return error_response(StatusCode::NOT_FOUND, format!("unknown proposal '{proposal_id}'"));
    }
    let Some(annotator) = q.annotator_id else {
        return error_response(StatusCode::BAD_REQUEST, "annotator_id query parameter is required");
    };
    match store.get(&proposal_id, &annotator) {
        Some((s, v)) => json_response(StatusCode::OK, &StoredAnnotation::new(s, v)),
        None => error_response(
            StatusCode::NOT_FOUND,
            format!("no annotation of '{proposal_id}' by '{annotator}'"),
        ),
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct ReportQuery {
    pub similarity: Option<String>,
    pub annotator_id: Option<String>,
    pub aggregate: Option<String>,
}

// Handlers return the error response as-is; boxing buys nothing here.
#[allow(clippy::result_large_err)]
impl ReportQuery {
    fn aggregation(&self) -> Result<Aggregation, Response> {
        match (&self.annotator_id, self.aggregate.as_deref()) {
            (Some(_), Some(_)) => Err(error_response(
                StatusCode::BAD_REQUEST,
                "give either annotator_id or aggregate, not both",
            )),
            (Some(a), None) => Ok(Aggregation::Annotator(a.clone())),
            (None, None | Some("majority")) => Ok(Aggregation::Majority),
            (None, Some(other)) => Err(error_response(
                StatusCode::BAD_REQUEST,
                format!("unknown aggregate '{other}' (expected majority)"),
            )),
        }
    }

    fn similarity(&self) -> Result<SimilarityKind, Response> {
        match &self.similarity {
            None => Ok(SimilarityKind::default()),
            Some(s) => s
                .parse()
                .map_err(|e: consensus_core::metrics::MetricsError| error_response(StatusCode::BAD_REQUEST, e.to_string())),
        }
    }
}

pub async fn get_report(State(store): State<SharedStore>, Query(q): Query<ReportQuery>) -> Response {
    let (agg, sim) = match (q.aggregation(), q.similarity()) {
        (Ok(a), Ok(s)) => (a, s),
        (Err(r), _) | (_, Err(r)) => return r,
    };
    json_response(StatusCode::OK, &store.read().await.report(&agg, sim))
}

pub async fn get_export(State(store): State<SharedStore>, Query(q): Query<ReportQuery>) -> Response {
    let agg = match q.aggregation() {
        Ok(a) => a,
        Err(r) => return r,
    };
    let ds = store.read().await.export(&agg);
    json_response(StatusCode::OK, ds.document())
}

pub async fn post_compact(State(store): State<SharedStore>) -> Response {
    match store.write().await.compact() {
        Ok(()) => json_response(StatusCode::OK, &json!({ "compacted": true })),
        Err(e) => {
            tracing::error!(error = %e, "compaction failed");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
    }
}
