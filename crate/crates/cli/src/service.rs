//! HTTP game service: the client plays the spoiler, the server answers.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use fomet::corpus::{builtin_pairs, CorpusEntry, CorpusPair};
use fomet::frequency::{classify_census, default_parameters};
use fomet::game::{
    duplicator_reply, optimal_reply, solve, GameConfiguration, InvariantReport, Mode, Pebble, Pebbles, ReplyItem,
    SpoilerMove, StrategyCase, StrategyContext, StrategyError, WinningTable,
};
use fomet::neighborhood::census;
use fomet::order::{build_order_pair, DEFAULT_TRANSFER_BUDGET};
use fomet::{parse_structure, OrderedStructure, Structure};

/// Structures above this size are refused for the optimal engine.
pub const MAX_SOLVER_SIZE: usize = 20_000;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn bad(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.message}))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DuplicatorKind {
    Strategy,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicName {
    Fo2,
    C2,
}

fn default_duplicator() -> DuplicatorKind {
    DuplicatorKind::Strategy
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub pair_ref: Option<String>,
    /// Two structures in the `.fms` format.
    pub structures: Option<[String; 2]>,
    /// Optional orders as element sequences, smallest first.
    pub orders: Option<[Vec<usize>; 2]>,
    pub k: usize,
    #[serde(default = "default_logic")]
    pub mode: LogicName,
    pub threshold: Option<usize>,
    #[serde(default = "default_duplicator")]
    pub duplicator: DuplicatorKind,
    #[serde(default)]
    pub seed: u64,
}

fn default_logic() -> LogicName {
    LogicName::Fo2
}

#[derive(Debug, Deserialize)]
pub struct MoveRequest {
    pub structure: usize,
    pub pebble: Pebble,
    pub element: Option<usize>,
    pub elements: Option<Vec<usize>>,
    /// In counting mode, the duplicator's element the spoiler keeps;
    /// defaults to the first answer.
    pub pick: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentsView {
    pub names: Vec<String>,
    /// Per structure, per segment name, its elements in order.
    pub blocks: [Vec<Vec<usize>>; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionState {
    pub round: usize,
    pub rounds_left: usize,
    pub pebbles: Pebbles,
    pub mode: Mode,
    pub duplicator: DuplicatorKind,
    /// Why the strategy engine was replaced by the optimal one, if it was.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Arc<SegmentsView>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_case: Option<StrategyCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winner: Option<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct MoveResponse {
    pub reply: Vec<ReplyItem>,
    pub state: SessionState,
    pub invariants: Option<InvariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winner: Option<&'static str>,
}

enum Duplicator {
    Strategy(Box<StrategyContext>),
    Optimal(Box<WinningTable>),
}

struct Session {
    duplicator: Duplicator,
    cfg: GameConfiguration,
    state: SessionState,
    structures: [Structure; 2],
    log: Option<PathBuf>,
}

impl Session {
    fn same_atomic_type(&self) -> bool {
        let (a, b) = self.cfg.pebbles.pair(0);
        let (c, d) = self.cfg.pebbles.pair(1);
        match &self.duplicator {
            Duplicator::Strategy(ctx) => {
                ctx.ordered(0).pair_atomic_type(a, b).ok() == ctx.ordered(1).pair_atomic_type(c, d).ok()
            }
            Duplicator::Optimal(t) => t.contains(0, &GameConfiguration { rounds_left: 0, ..self.cfg }).unwrap_or(false),
        }
    }

    fn replies(&self, mv: &SpoilerMove) -> Result<Vec<ReplyItem>, StrategyError> {
        match &self.duplicator {
            Duplicator::Strategy(ctx) => duplicator_reply(ctx, &self.cfg, mv),
            Duplicator::Optimal(t) => optimal_reply(t, &self.cfg, mv),
        }
    }

    fn invariants(&self) -> Option<InvariantReport> {
        match &self.duplicator {
            Duplicator::Strategy(ctx) => Some(ctx.invariants(&self.cfg)),
            Duplicator::Optimal(_) => None,
        }
    }
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    corpus_dir: Option<PathBuf>,
    log_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(corpus_dir: Option<PathBuf>, log_dir: Option<PathBuf>) -> Self {
        AppState { corpus_dir, log_dir, ..Default::default() }
    }

    /// Built-in pairs plus `<name>.0.fms` / `<name>.1.fms` files in the
    /// corpus directory.
    fn corpus(&self) -> Vec<CorpusPair> {
        let mut pairs = builtin_pairs();
        let Some(dir) = &self.corpus_dir else { return pairs };
        let Ok(entries) = std::fs::read_dir(dir) else { return pairs };
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok()?.file_name().into_string().ok())
            .filter_map(|f| f.strip_suffix(".0.fms").map(str::to_owned))
            .collect();
        names.sort();
        for name in names {
            let read = |i: usize| {
                std::fs::read_to_string(dir.join(format!("{name}.{i}.fms"))).ok().and_then(|t| parse_structure(&t).ok())
            };
            if let (Some(a), Some(b)) = (read(0), read(1)) {
                pairs.push(CorpusPair {
                    name: name.clone(),
                    description: format!("{name} from the corpus directory"),
                    structures: [a, b],
                    orders: None,
                });
            }
        }
        pairs
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/corpus", get(list_corpus))
        .route("/sessions", post(create_session))
        .route("/sessions/:id", get(get_session))
        .route("/sessions/:id/moves", post(make_move))
        .route("/sessions/:id/preview", post(preview_move))
        .with_state(state)
}

async fn list_corpus(State(app): State<Arc<AppState>>) -> Json<Vec<CorpusEntry>> {
    let app = app.clone();
    let list = tokio::task::spawn_blocking(move || app.corpus().iter().map(CorpusPair::entry).collect())
        .await
        .unwrap_or_default();
    Json(list)
}

fn resolve_pair(app: &AppState, req: &CreateSession) -> Result<([Structure; 2], Option<[OrderedStructure; 2]>), ApiError> {
    let (structures, mut orders) = match (&req.pair_ref, &req.structures) {
        (Some(name), None) => {
            let p = app
                .corpus()
                .into_iter()
                .find(|p| &p.name == name)
                .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no corpus pair named `{name}`")))?;
            (p.structures, p.orders)
        }
        (None, Some([a, b])) => {
            let parse = |t: &str| parse_structure(t).map_err(|e| ApiError::unprocessable(e.to_string()));
            ([parse(a)?, parse(b)?], None)
        }
        _ => return Err(ApiError::bad("give exactly one of `pair_ref` and `structures`")),
    };
    if let Some([o0, o1]) = &req.orders {
        let order = |s: &Structure, seq: &[usize]| {
            OrderedStructure::from_sequence(s.clone(), seq.to_vec()).map_err(|e| ApiError::unprocessable(e.to_string()))
        };
        orders = Some([order(&structures[0], o0)?, order(&structures[1], o1)?]);
    }
    Ok((structures, orders))
}

fn strategy_context(s: &[Structure; 2], k: usize, c2: bool) -> Result<StrategyContext, String> {
    let c = census(&s[0], k).map_err(|e| e.to_string())?;
    let params = default_parameters(k, s[0].degree().max(s[1].degree()), &c, c2).map_err(|e| e.to_string())?;
    let cls = classify_census(&c, &params).map_err(|e| e.to_string())?;
    let pair = build_order_pair(&s[0], &s[1], &cls, DEFAULT_TRANSFER_BUDGET).map_err(|e| e.to_string())?;
    Ok(StrategyContext::new(pair))
}

fn optimal_table(
    s: &[Structure; 2],
    orders: &Option<[OrderedStructure; 2]>,
    k: usize,
    mode: Mode,
) -> Result<WinningTable, ApiError> {
    if s[0].size().max(s[1].size()) > MAX_SOLVER_SIZE {
        return Err(ApiError::unprocessable(format!("structures above {MAX_SOLVER_SIZE} elements are too large to solve")));
    }
    match orders {
        Some([a, b]) => solve(a, b, k, mode),
        None => solve(&s[0], &s[1], k, mode),
    }
    .map_err(|e| ApiError::unprocessable(e.to_string()))
}

fn new_session(app: &AppState, req: CreateSession) -> Result<Session, ApiError> {
    let (structures, orders) = resolve_pair(app, &req)?;
    if structures[0].signature() != structures[1].signature() {
        return Err(ApiError::unprocessable("structures have different signatures"));
    }
    let mode = match (req.mode, req.threshold) {
        (LogicName::Fo2, _) => Mode::Plain,
        (LogicName::C2, Some(0)) => return Err(ApiError::unprocessable("threshold must be positive")),
        (LogicName::C2, t) => Mode::Counting { threshold: t.unwrap_or(req.k.max(1)) },
    };
    let (duplicator, fallback) = match req.duplicator {
        DuplicatorKind::Strategy if orders.is_some() => {
            (None, Some("the strategy builds its own orders; the pair comes with fixed orders".to_string()))
        }
        DuplicatorKind::Strategy => match strategy_context(&structures, req.k, matches!(mode, Mode::Counting { .. })) {
            Ok(ctx) if mode.threshold() <= req.k.max(1) => (Some(Duplicator::Strategy(Box::new(ctx))), None),
            Ok(_) => (None, Some(format!("threshold {} exceeds the {} pin copies", mode.threshold(), req.k.max(1)))),
            Err(e) => (None, Some(e)),
        },
        DuplicatorKind::Optimal => (None, None),
    };
    let (duplicator, kind) = match duplicator {
        Some(d) => (d, DuplicatorKind::Strategy),
        None => (Duplicator::Optimal(Box::new(optimal_table(&structures, &orders, req.k, mode)?)), DuplicatorKind::Optimal),
    };
    let cfg = match &duplicator {
        Duplicator::Strategy(ctx) => ctx.initial(mode),
        Duplicator::Optimal(t) => fomet::game::Engine::Optimal(t).initial(mode),
    };
    let segments = match &duplicator {
        Duplicator::Strategy(ctx) => {
            let names = ctx.pair.decompositions[0].segments().iter().map(|(n, _)| n.to_string()).collect();
            let blocks = [0, 1].map(|i| ctx.pair.decompositions[i].segments().iter().map(|(_, e)| e.to_vec()).collect());
            Some(Arc::new(SegmentsView { names, blocks }))
        }
        Duplicator::Optimal(_) => None,
    };
    let state = SessionState {
        round: 0,
        rounds_left: cfg.rounds_left,
        pebbles: cfg.pebbles,
        mode,
        duplicator: kind,
        fallback,
        segments,
        last_case: None,
        winner: None,
    };
    let mut session = Session { duplicator, cfg, state, structures, log: None };
    if !session.same_atomic_type() {
        session.state.winner = Some("spoiler");
    } else if session.cfg.rounds_left == 0 {
        session.state.winner = Some("duplicator");
    }
    Ok(session)
}

async fn create_session(State(app): State<Arc<AppState>>, Json(req): Json<CreateSession>) -> ApiResult<Value> {
    let worker = app.clone();
    let mut session = tokio::task::spawn_blocking(move || new_session(&worker, req))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    if let Some(dir) = &app.log_dir {
        session.log = Some(dir.join(format!("{id}.jsonl")));
    }
    let state = session.state.clone();
    append_log(&session, &json!({"event": "created", "state": state}));
    app.sessions.write().expect("session map").insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok(Json(json!({"id": id, "state": state})))
}

fn find(app: &AppState, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
    app.sessions
        .read()
        .expect("session map")
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionState> {
    let s = find(&app, &id)?;
    let state = s.lock().expect("session").state.clone();
    Ok(Json(state))
}

fn spoiler_move(session: &Session, req: &MoveRequest) -> Result<SpoilerMove, ApiError> {
    if req.structure > 1 {
        return Err(ApiError::unprocessable(format!("structure must be 0 or 1, got {}", req.structure)));
    }
    let elements = match (req.element, &req.elements) {
        (Some(e), None) => vec![e],
        (None, Some(es)) => es.clone(),
        _ => return Err(ApiError::bad("give exactly one of `element` and `elements`")),
    };
    let n = session.structures[req.structure].size();
    if let Some(e) = elements.iter().find(|&&e| e >= n) {
        return Err(ApiError::unprocessable(format!("element {e} is out of range for structure {} of size {n}", req.structure)));
    }
    Ok(SpoilerMove { structure: req.structure, pebble: req.pebble, elements })
}

fn reply_error(e: StrategyError) -> ApiError {
    match e {
        StrategyError::IllegalMove(_) | StrategyError::GameOver => ApiError::unprocessable(e.to_string()),
        _ => ApiError::new(StatusCode::CONFLICT, e.to_string()),
    }
}

fn apply_move(session: &mut Session, req: &MoveRequest) -> Result<MoveResponse, ApiError> {
    if session.state.winner.is_some() {
        return Err(ApiError::unprocessable("the game is over"));
    }
    let mv = spoiler_move(session, req)?;
    let replies = session.replies(&mv).map_err(reply_error)?;
    let picked = match req.pick {
        None => replies[0].clone(),
        Some(p) => replies
            .iter()
            .find(|r| r.reply == p)
            .cloned()
            .ok_or_else(|| ApiError::unprocessable(format!("{p} is not among the duplicator's answers")))?,
    };
    session.cfg.pebbles.set(mv.structure, mv.pebble, picked.element);
    session.cfg.pebbles.set(1 - mv.structure, mv.pebble, picked.reply);
    session.cfg.rounds_left -= 1;
    let st = &mut session.state;
    st.round += 1;
    st.rounds_left = session.cfg.rounds_left;
    st.pebbles = session.cfg.pebbles;
    st.last_case = picked.case;
    let same = session.same_atomic_type();
    let st = &mut session.state;
    if !same {
        st.winner = Some("spoiler");
    } else if st.rounds_left == 0 {
        st.winner = Some("duplicator");
    }
    let invariants = session.invariants();
    let response = MoveResponse { reply: replies, state: session.state.clone(), invariants, winner: session.state.winner };
    append_log(session, &json!({"event": "move", "request": {"structure": mv.structure, "pebble": mv.pebble, "elements": mv.elements}, "response": response}));
    Ok(response)
}

async fn make_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> ApiResult<MoveResponse> {
    let s = find(&app, &id)?;
    let mut session = s.lock().expect("session");
    apply_move(&mut session, &req).map(Json)
}

/// The answers the duplicator would give, without playing the move.
async fn preview_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> ApiResult<Vec<ReplyItem>> {
    let s = find(&app, &id)?;
    let session = s.lock().expect("session");
    if session.state.winner.is_some() {
        return Err(ApiError::unprocessable("the game is over"));
    }
    let mv = spoiler_move(&session, &req)?;
    session.replies(&mv).map(Json).map_err(reply_error)
}

fn append_log(session: &Session, line: &Value) {
    let Some(path) = &session.log else { return };
    if let Ok(mut f) = std::fs::OpenOptions::new().create(true).append(true).open(path) {
        let _ = writeln!(f, "{line}");
    }
}

pub async fn serve(port: u16, corpus_dir: Option<PathBuf>, log_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let app = router(Arc::new(AppState::new(corpus_dir, log_dir)));
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
