//! C ABI for the ontoq engine.
//!
//! The engine is an opaque handle created by [`ontoq_engine_load`] and
//! released with [`ontoq_engine_free`]. Query functions return JSON strings
//! identical to the HTTP service bodies; free them with
//! [`ontoq_string_free`]. Every function returns an [`OntoqStatus`]; on
//! failure [`ontoq_last_error_message`] describes the error on the calling
//! thread.
//!
//! A loaded engine is immutable, so one handle may be queried from several
//! threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ontoq::service::{related_terms, term_body, Direction};
use ontoq::{
    AnnotationType, BuildError, DataSources, Engine, LoadError, LookupError, QueryRequest,
    RelationSet,
};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OntoqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Cycle = 5,
    DuplicateTerm = 6,
    UnknownTerm = 7,
    InvalidArgument = 8,
    Panic = 9,
}

/// Opaque engine handle.
pub struct OntoqEngine {
    engine: Engine,
}

/// Relation bits for [`OntoqSearchOptions::relations`] and related-term calls.
pub const ONTOQ_REL_IS_A: u8 = 1;
pub const ONTOQ_REL_PART_OF: u8 = 2;
pub const ONTOQ_REL_DEVELOPS_FROM: u8 = 4;

/// Search flags. Start from [`ontoq_search_options_default`].
///
/// `annotation_type` and `object_type` are optional filters (NULL for none).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OntoqSearchOptions {
    pub include_descendants: bool,
    pub include_composites: bool,
    pub include_ancestor_composites: bool,
    pub include_bridges: bool,
    /// Bitwise OR of `ONTOQ_REL_*`; must be non-zero.
    pub relations: u8,
    pub annotation_type: *const c_char,
    pub object_type: *const c_char,
}

/// Corpus counts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OntoqStats {
    pub terms: u64,
    pub ontologies: u64,
    pub annotations: u64,
    pub bridges: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(OntoqStatus, String);

impl Failure {
    fn new(status: OntoqStatus, message: impl Into<String>) -> Self {
        Failure(status, message.into())
    }
}

impl From<LookupError> for Failure {
    fn from(e: LookupError) -> Self {
        let status = match e {
            LookupError::UnknownTerm(_) => OntoqStatus::UnknownTerm,
            LookupError::EmptyRelationSet => OntoqStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let status = match &e {
            LoadError::NoOntologies => OntoqStatus::InvalidArgument,
            LoadError::Io { .. } => OntoqStatus::Io,
            LoadError::Parse(_) | LoadError::Unresolved(_) => OntoqStatus::Parse,
            LoadError::Build(BuildError::Cycle(_)) => OntoqStatus::Cycle,
            LoadError::Build(BuildError::DuplicateTerm { .. }) => OntoqStatus::DuplicateTerm,
            LoadError::Build(_) => OntoqStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

/// Runs `f`, converting failures and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OntoqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            OntoqStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            OntoqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            OntoqStatus::NullArgument,
            format!("{name} is NULL"),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(OntoqStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn path_list(
    p: *const *const c_char,
    count: usize,
    name: &str,
) -> Result<Vec<PathBuf>, Failure> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Failure::new(
            OntoqStatus::NullArgument,
            format!("{name} is NULL"),
        ));
    }
    std::slice::from_raw_parts(p, count)
        .iter()
        .map(|&s| str_arg(s, name).map(PathBuf::from))
        .collect()
}

unsafe fn engine_arg<'a>(p: *const OntoqEngine) -> Result<&'a Engine, Failure> {
    p.as_ref()
        .map(|h| &h.engine)
        .ok_or_else(|| Failure::new(OntoqStatus::NullArgument, "engine is NULL"))
}

fn relation_bits(bits: u8) -> Result<RelationSet, Failure> {
    RelationSet::from_bits(bits)
        .filter(|r| !r.is_empty())
        .ok_or_else(|| {
            Failure::new(
                OntoqStatus::InvalidArgument,
                format!("invalid relation bits {bits:#x}"),
            )
        })
}

unsafe fn write_json<T: serde::Serialize>(out: *mut *mut c_char, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string(value)
        .map_err(|e| Failure::new(OntoqStatus::InvalidArgument, e.to_string()))?;
    let c = CString::new(text)
        .map_err(|_| Failure::new(OntoqStatus::InvalidArgument, "result contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::new(OntoqStatus::NullArgument, "out is NULL"))
    } else {
        Ok(())
    }
}

/// Loads ontologies, optional annotations and bridge files.
///
/// `annotation_path` may be NULL. On success `*out` receives a handle to
/// release with [`ontoq_engine_free`].
///
/// # Safety
/// Path arrays must hold `*_count` valid NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn ontoq_engine_load(
    obo_paths: *const *const c_char,
    obo_count: usize,
    annotation_path: *const c_char,
    bridge_paths: *const *const c_char,
    bridge_count: usize,
    lenient: bool,
    out: *mut *mut OntoqEngine,
) -> OntoqStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let sources = DataSources {
            obo_files: path_list(obo_paths, obo_count, "obo_paths")?,
            annotation_file: opt_str_arg(annotation_path, "annotation_path")?.map(PathBuf::from),
            bridge_files: path_list(bridge_paths, bridge_count, "bridge_paths")?,
            lenient,
        };
        let engine = Engine::load(&sources)?;
        *out = Box::into_raw(Box::new(OntoqEngine { engine }));
        Ok(())
    })
}

/// Releases an engine. NULL is ignored.
///
/// # Safety
/// `engine` must come from [`ontoq_engine_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ontoq_engine_free(engine: *mut OntoqEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Default search flags: descendants and composites on, is_a + part_of.
#[no_mangle]
pub extern "C" fn ontoq_search_options_default() -> OntoqSearchOptions {
    let d = QueryRequest::new("");
    OntoqSearchOptions {
        include_descendants: d.include_descendants,
        include_composites: d.include_composites,
        include_ancestor_composites: d.include_ancestor_composites,
        include_bridges: d.include_bridges,
        relations: d.relations.bits(),
        annotation_type: ptr::null(),
        object_type: ptr::null(),
    }
}

/// Runs a search and writes the `/search` JSON body to `*out`.
///
/// `options` may be NULL for defaults.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontoq_search_json(
    engine: *const OntoqEngine,
    term: *const c_char,
    options: *const OntoqSearchOptions,
    out: *mut *mut c_char,
) -> OntoqStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let engine = engine_arg(engine)?;
        let term = str_arg(term, "term")?;
        let opts = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| ontoq_search_options_default());
        let annotation_type_filter = opt_str_arg(opts.annotation_type, "annotation_type")?
            .map(|t| t.parse::<AnnotationType>())
            .transpose()
            .map_err(|e| Failure::new(OntoqStatus::InvalidArgument, e))?;
        let request = QueryRequest {
            term: term.to_string(),
            include_descendants: opts.include_descendants,
            relations: relation_bits(opts.relations)?,
            include_composites: opts.include_composites,
            include_ancestor_composites: opts.include_ancestor_composites,
            include_bridges: opts.include_bridges,
            annotation_type_filter,
            object_type_filter: opt_str_arg(opts.object_type, "object_type")?.map(str::to_string),
        };
        write_json(out, &engine.execute_search(&request)?)
    })
}

/// Ranked autocomplete; writes the `/autocomplete` JSON array to `*out`.
///
/// `ontology` may be NULL for all ontologies.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontoq_autocomplete_json(
    engine: *const OntoqEngine,
    query: *const c_char,
    limit: usize,
    ontology: *const c_char,
    out: *mut *mut c_char,
) -> OntoqStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let engine = engine_arg(engine)?;
        let query = str_arg(query, "query")?;
        let ontology = opt_str_arg(ontology, "ontology")?;
        let matches = engine
            .lexicon
            .autocomplete(query, limit, ontology)
            .map_err(|e| Failure::new(OntoqStatus::InvalidArgument, e.to_string()))?;
        write_json(out, &matches)
    })
}

/// Term details; writes the `/terms/{id}` JSON body to `*out`.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontoq_term_json(
    engine: *const OntoqEngine,
    id: *const c_char,
    out: *mut *mut c_char,
) -> OntoqStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let engine = engine_arg(engine)?;
        write_json(out, &term_body(engine, str_arg(id, "id")?)?)
    })
}

/// Parents, children, ancestors or descendants of a term; writes the
/// `/terms/{id}/{direction}` JSON array to `*out`.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontoq_related_json(
    engine: *const OntoqEngine,
    id: *const c_char,
    direction: *const c_char,
    relations: u8,
    out: *mut *mut c_char,
) -> OntoqStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let engine = engine_arg(engine)?;
        let id = str_arg(id, "id")?;
        let direction: Direction = str_arg(direction, "direction")?
            .parse()
            .map_err(|e: String| Failure::new(OntoqStatus::InvalidArgument, e))?;
        let terms = related_terms(engine, id, direction, relation_bits(relations)?)?;
        write_json(out, &terms)
    })
}

/// Corpus counts.
///
/// # Safety
/// `engine` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ontoq_stats(
    engine: *const OntoqEngine,
    out: *mut OntoqStats,
) -> OntoqStatus {
    guard(|| {
        let engine = engine_arg(engine)?;
        let out = out
            .as_mut()
            .ok_or_else(|| Failure::new(OntoqStatus::NullArgument, "out is NULL"))?;
        let s = engine.stats();
        *out = OntoqStats {
            terms: s.terms as u64,
            ontologies: s.ontologies as u64,
            annotations: s.annotations as u64,
            bridges: s.bridges as u64,
        };
        Ok(())
    })
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ontoq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread ("" after a success).
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ontoq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
