//! The algorithm-side interface driven by the simulator.

use serde::Serialize;

use super::{
    Aggregator, BroadcastMsg, LinUcbState, RobinClient, RobinParams, RobinServer, UploadMsg,
};
use crate::dp::PrivacyParams;
use crate::env::DecisionSet;
use crate::error::Result;
use crate::numkit::{RngStream, SymMat};

/// A message that crossed the client/server boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Traffic {
    Upload(UploadMsg),
    Broadcast(BroadcastMsg),
}

/// A set of clients plus whatever coordination they use. The simulator
/// calls `begin_phase`, then `select`/`observe` per client per round, then
/// `end_phase`.
pub trait Federation {
    fn num_clients(&self) -> usize;

    fn begin_phase(&mut self, phase: u32) -> Result<()>;

    fn select(&mut self, client: usize, ds: &DecisionSet) -> Result<usize>;

    fn observe(&mut self, client: usize, x: &[f64], reward: f64);

    /// Gram matrix currently held by a client, if it keeps one.
    fn client_gram(&self, client: usize) -> Option<&SymMat> {
        let _ = client;
        None
    }

    /// Closes a phase of nominal length `len`. `complete` is false when the
    /// horizon cut the phase short. Returns the messages exchanged.
    fn end_phase(
        &mut self,
        phase: u32,
        len: usize,
        complete: bool,
        rng: &mut RngStream,
    ) -> Result<Vec<Traffic>>;

    /// Latest server-side estimate of the shared parameter.
    fn global_estimate(&self) -> Option<&[f64]> {
        None
    }

    fn budget_spent(&self) -> PrivacyParams {
        PrivacyParams {
            epsilon: 0.0,
            delta: 0.0,
        }
    }
}

/// Clients and server of the phased protocol.
#[derive(Debug, Clone)]
pub struct RobinFederation {
    clients: Vec<RobinClient>,
    server: RobinServer,
    latest: Option<BroadcastMsg>,
}

impl RobinFederation {
    pub fn new(params: RobinParams) -> Self {
        let clients = (0..params.m)
            .map(|i| RobinClient::new(i, params.d, params.u, params.alpha))
            .collect();
        Self {
            clients,
            server: RobinServer::new(params),
            latest: None,
        }
    }

    /// Same protocol with the exact mean in place of private aggregation.
    pub fn non_private(mut params: RobinParams) -> Self {
        params.aggregator = Aggregator::ExactMean;
        Self::new(params)
    }

    pub fn clients(&self) -> &[RobinClient] {
        &self.clients
    }

    pub fn server(&self) -> &RobinServer {
        &self.server
    }
}

impl Federation for RobinFederation {
    fn num_clients(&self) -> usize {
        self.clients.len()
    }

    fn begin_phase(&mut self, phase: u32) -> Result<()> {
        for c in &mut self.clients {
            c.begin_phase(phase, self.latest.as_ref());
        }
        Ok(())
    }

    fn select(&mut self, client: usize, ds: &DecisionSet) -> Result<usize> {
        self.clients[client].select(ds)
    }

    fn observe(&mut self, client: usize, x: &[f64], reward: f64) {
        self.clients[client].observe(x, reward);
    }

    fn client_gram(&self, client: usize) -> Option<&SymMat> {
        Some(self.clients[client].accumulator().gram())
    }

    fn end_phase(
        &mut self,
        phase: u32,
        len: usize,
        complete: bool,
        rng: &mut RngStream,
    ) -> Result<Vec<Traffic>> {
        if !complete || phase < self.server.params().u {
            return Ok(Vec::new());
        }
        let uploads = self
            .clients
            .iter()
            .map(RobinClient::local_estimate)
            .collect::<Result<Vec<_>>>()?;
        let broadcast = self.server.aggregate(&uploads, phase, len, rng)?;
        self.latest = Some(broadcast.clone());
        let mut traffic: Vec<Traffic> = uploads.into_iter().map(Traffic::Upload).collect();
        traffic.push(Traffic::Broadcast(broadcast));
        Ok(traffic)
    }

    fn global_estimate(&self) -> Option<&[f64]> {
        self.latest.as_ref().map(|b| b.theta_hat.as_slice())
    }

    fn budget_spent(&self) -> PrivacyParams {
        self.server.spent()
    }
}

/// Independent LinUCB learners that never communicate.
#[derive(Debug, Clone)]
pub struct LocalOnly {
    learners: Vec<LinUcbState>,
}

impl LocalOnly {
    pub fn new(m: usize, d: usize, alpha: f64) -> Self {
        Self {
            learners: vec![LinUcbState::new(d, alpha); m],
        }
    }

    pub fn learners(&self) -> &[LinUcbState] {
        &self.learners
    }
}

impl Federation for LocalOnly {
    fn num_clients(&self) -> usize {
        self.learners.len()
    }

    fn begin_phase(&mut self, _phase: u32) -> Result<()> {
        Ok(())
    }

    fn select(&mut self, client: usize, ds: &DecisionSet) -> Result<usize> {
        self.learners[client].select(ds)
    }

    fn observe(&mut self, client: usize, x: &[f64], reward: f64) {
        self.learners[client].update(x, reward);
    }

    fn client_gram(&self, client: usize) -> Option<&SymMat> {
        Some(self.learners[client].gram())
    }

    fn end_phase(
        &mut self,
        _phase: u32,
        _len: usize,
        _complete: bool,
        _rng: &mut RngStream,
    ) -> Result<Vec<Traffic>> {
        Ok(Vec::new())
    }
}
