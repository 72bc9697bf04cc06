//! Wire contract for remote top-k endpoints.
//!
//! Request/response bodies are JSON:
//!
//! ```text
//! request:  {"predicates": {"A3": "1", "A5": "0"}}
//! response: {"status": "overflow|valid|underflow", "tuples": [["0","1",...], ...]}
//! ```
//!
//! sent over HTTP POST to a configured endpoint. [`RemoteTopK`] adapts such
//! an endpoint to [`TopKSource`], assigning stable local ids to the value
//! vectors it sees and enforcing a queries-per-hour budget. The transport is
//! pluggable; [`LoopbackTransport`] serves a local simulated site through
//! the same wire encoding for tests and offline use.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use crate::error::{ConnectorError, InterfaceError};
use crate::query::{Query, QueryResult, ResultStatus};
use crate::schema::{Schema, Tuple, TupleId, Value};
use crate::interface::TopKSource;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRequest {
    pub predicates: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireResponse {
    pub status: String,
    pub tuples: Vec<Vec<String>>,
}

pub fn status_to_wire(status: ResultStatus) -> &'static str {
    match status {
        ResultStatus::Overflow => "overflow",
        ResultStatus::Valid => "valid",
        ResultStatus::Underflow => "underflow",
    }
}

pub fn status_from_wire(s: &str) -> Option<ResultStatus> {
    match s {
        "overflow" => Some(ResultStatus::Overflow),
        "valid" => Some(ResultStatus::Valid),
        "underflow" => Some(ResultStatus::Underflow),
        _ => None,
    }
}

/// Encode a typed query for the wire.
pub fn wire_request(schema: &Schema, query: &Query) -> WireRequest {
    WireRequest {
        predicates: query
            .predicates()
            .map(|(a, v)| (schema.attr(a).name.clone(), schema.label(a, v).to_string()))
            .collect(),
    }
}

/// Server-side helper: answer a wire request from any local source.
/// Useful for serving a simulated site behind the HTTP contract.
pub fn answer_wire_request(
    iface: &mut dyn TopKSource,
    request: &WireRequest,
) -> Result<WireResponse, InterfaceError> {
    let schema = iface.schema().clone();
    let mut query = Query::select_all();
    for (name, label) in &request.predicates {
        let attr = schema
            .attr_id(name)
            .ok_or_else(|| InterfaceError::Remote(format!("unknown attribute `{name}`")))?;
        let value = schema.value_of(attr, label).ok_or_else(|| InterfaceError::UnknownValue {
            attribute: name.clone(),
            value: u16::MAX,
        })?;
        query.set(attr, value);
    }
    let result = iface.execute(&query)?;
    Ok(WireResponse {
        status: status_to_wire(result.status).to_string(),
        tuples: result.returned.iter().map(|t| t.labels(&schema)).collect(),
    })
}

/// How request bodies reach the endpoint.
pub trait Transport {
    fn post(&mut self, body: &str) -> Result<String, ConnectorError>;
}

/// HTTP POST transport.
pub struct HttpTransport {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpTransport { endpoint: endpoint.into(), agent: ureq::agent() }
    }
}

impl Transport for HttpTransport {
    fn post(&mut self, body: &str) -> Result<String, ConnectorError> {
        let response = self
            .agent
            .post(&self.endpoint)
            .set("Content-Type", "application/json")
            .send_string(body)
            .map_err(|e| ConnectorError::Transport(e.to_string()))?;
        response.into_string().map_err(|e| ConnectorError::Transport(e.to_string()))
    }
}

/// In-process transport that serves a local source through the wire
/// encoding; the stub stand-in for a live site.
pub struct LoopbackTransport<S: TopKSource> {
    site: S,
}

impl<S: TopKSource> LoopbackTransport<S> {
    pub fn new(site: S) -> Self {
        LoopbackTransport { site }
    }

    pub fn site(&self) -> &S {
        &self.site
    }
}

impl<S: TopKSource> Transport for LoopbackTransport<S> {
    fn post(&mut self, body: &str) -> Result<String, ConnectorError> {
        let request: WireRequest = serde_json::from_str(body)
            .map_err(|e| ConnectorError::Protocol(e.to_string()))?;
        let response = answer_wire_request(&mut self.site, &request)
            .map_err(|e| ConnectorError::Transport(e.to_string()))?;
        serde_json::to_string(&response).map_err(|e| ConnectorError::Protocol(e.to_string()))
    }
}

/// A remote top-k endpoint adapted to [`TopKSource`].
///
/// The caller supplies the schema (attribute names and domains) and `k` as
/// connector configuration. Distinct value vectors get stable local ids in
/// first-seen order, so dominance bookkeeping works exactly as with the
/// simulator.
pub struct RemoteTopK<T: Transport> {
    schema: Schema,
    k: usize,
    transport: T,
    count: u64,
    queries_per_hour: Option<u32>,
    window: VecDeque<Instant>,
    ids: HashMap<Vec<Value>, TupleId>,
}

impl<T: Transport> RemoteTopK<T> {
    pub fn new(
        schema: Schema,
        k: usize,
        queries_per_hour: Option<u32>,
        transport: T,
    ) -> Result<Self, InterfaceError> {
        if k <= 1 {
            return Err(InterfaceError::InvalidK { k });
        }
        Ok(RemoteTopK {
            schema,
            k,
            transport,
            count: 0,
            queries_per_hour,
            window: VecDeque::new(),
            ids: HashMap::new(),
        })
    }

    fn check_rate(&mut self) -> Result<(), ConnectorError> {
        let Some(per_hour) = self.queries_per_hour else { return Ok(()) };
        let now = Instant::now();
        while let Some(front) = self.window.front() {
            if now.duration_since(*front) >= Duration::from_secs(3600) {
                self.window.pop_front();
            } else {
                break;
            }
        }
        if self.window.len() >= per_hour as usize {
            return Err(ConnectorError::RateLimited { per_hour });
        }
        self.window.push_back(now);
        Ok(())
    }

    fn decode(&mut self, response: WireResponse) -> Result<QueryResult, ConnectorError> {
        let status = status_from_wire(&response.status)
            .ok_or_else(|| ConnectorError::Protocol(format!("bad status `{}`", response.status)))?;
        let mut returned = Vec::with_capacity(response.tuples.len());
        for labels in &response.tuples {
            if labels.len() != self.schema.attr_count() {
                return Err(ConnectorError::Protocol(format!(
                    "tuple has {} values, schema has {} attributes",
                    labels.len(),
                    self.schema.attr_count()
                )));
            }
            let mut values = Vec::with_capacity(labels.len());
            for (i, label) in labels.iter().enumerate() {
                let attr = crate::schema::AttrId(i as u16);
                let value = self.schema.value_of(attr, label).ok_or_else(|| {
                    ConnectorError::Protocol(format!(
                        "value `{label}` outside the domain of `{}`",
                        self.schema.attr(attr).name
                    ))
                })?;
                values.push(value);
            }
            let next_id = TupleId(self.ids.len() as u32);
            let id = *self.ids.entry(values.clone()).or_insert(next_id);
            returned.push(Tuple::new(id, values));
        }
        match status {
            ResultStatus::Overflow if returned.len() != self.k => {
                return Err(ConnectorError::Protocol(format!(
                    "overflow must return exactly k = {} tuples, got {}",
                    self.k,
                    returned.len()
                )))
            }
            ResultStatus::Valid if returned.is_empty() || returned.len() > self.k => {
                return Err(ConnectorError::Protocol(format!(
                    "valid result size {} outside 1..=k",
                    returned.len()
                )))
            }
            ResultStatus::Underflow if !returned.is_empty() => {
                return Err(ConnectorError::Protocol("underflow carried tuples".into()))
            }
            _ => {}
        }
        Ok(QueryResult { returned, status })
    }
}

impl<T: Transport> TopKSource for RemoteTopK<T> {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn k(&self) -> usize {
        self.k
    }

    fn query_count(&self) -> u64 {
        self.count
    }

    fn execute(&mut self, query: &Query) -> Result<QueryResult, InterfaceError> {
        self.check_rate().map_err(|e| InterfaceError::Remote(e.to_string()))?;
        let request = wire_request(&self.schema, query);
        let body = serde_json::to_string(&request)
            .map_err(|e| InterfaceError::Remote(e.to_string()))?;
        let reply = self
            .transport
            .post(&body)
            .map_err(|e| InterfaceError::Remote(e.to_string()))?;
        self.count += 1;
        let response: WireResponse = serde_json::from_str(&reply)
            .map_err(|e| InterfaceError::Remote(format!("malformed response: {e}")))?;
        self.decode(response).map_err(|e| InterfaceError::Remote(e.to_string()))
    }
}
