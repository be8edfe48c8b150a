//! C interface to latstd.
//!
//! Corpora are opaque handles created by `latstd_corpus_parse` or
//! `latstd_corpus_convert` and released with `latstd_corpus_free`. Every
//! fallible function returns a `LatstdStatus`; on failure the message is
//! available from `latstd_last_error_message` on the same thread. Strings
//! returned through out-parameters are owned by the caller and released
//! with `latstd_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use latstd::conllu::{parse_conllu_str, serialize_conllu, Sentence};
use latstd::convert::{convert_corpus, ConvertOptions};
use latstd::error::Error;
use latstd::eval::{macro_f1, permutation_test, whole_string_accuracy, Metric};
use latstd::normalize::jv_replace;
use latstd::standardize::Flavor;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatstdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Alignment = 4,
    Config = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatstdFlavor {
    Ud = 0,
    Lasla = 1,
    Standard = 2,
}

impl From<LatstdFlavor> for Flavor {
    fn from(f: LatstdFlavor) -> Flavor {
        match f {
            LatstdFlavor::Ud => Flavor::Ud,
            LatstdFlavor::Lasla => Flavor::Lasla,
            LatstdFlavor::Standard => Flavor::Standard,
        }
    }
}

/// A parsed CoNLL-U corpus.
pub struct LatstdCorpus {
    sentences: Vec<Sentence>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> LatstdStatus {
    match e {
        Error::Alignment(_) => LatstdStatus::Alignment,
        Error::Config(_) | Error::Infeasible { .. } | Error::Period(_) => LatstdStatus::Config,
        Error::File { source, .. } => status_of(source),
        Error::Io(_) | Error::Json(_) => LatstdStatus::Internal,
        _ => LatstdStatus::Parse,
    }
}

fn fail(status: LatstdStatus, msg: impl Into<String>) -> LatstdStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (LatstdStatus, String)>) -> LatstdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LatstdStatus::Ok
        }
        Ok(Err((status, msg))) => fail(status, msg),
        Err(_) => fail(LatstdStatus::Internal, "internal panic"),
    }
}

fn lib_err(e: Error) -> (LatstdStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (LatstdStatus, String)> {
    if p.is_null() {
        return Err((LatstdStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (LatstdStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn corpus_arg<'a>(p: *const LatstdCorpus, name: &str) -> Result<&'a LatstdCorpus, (LatstdStatus, String)> {
    p.as_ref()
        .ok_or_else(|| (LatstdStatus::NullPointer, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), (LatstdStatus, String)> {
    if p.is_null() {
        Err((LatstdStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> Result<*mut c_char, (LatstdStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (LatstdStatus::Internal, "string contains a NUL byte".to_string()))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn latstd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn latstd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses CoNLL-U text into a new corpus handle.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_corpus_parse(text: *const c_char, out: *mut *mut LatstdCorpus) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let sentences = parse_conllu_str(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(LatstdCorpus { sentences }));
        Ok(())
    })
}

/// Releases a corpus. NULL is ignored.
///
/// # Safety
/// `corpus` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn latstd_corpus_free(corpus: *mut LatstdCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Writes the corpus back to CoNLL-U.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_corpus_serialize(corpus: *const LatstdCorpus, out: *mut *mut c_char) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        let c = corpus_arg(corpus, "corpus")?;
        *out = c_string(serialize_conllu(&c.sentences))?;
        Ok(())
    })
}

/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_corpus_sentence_count(corpus: *const LatstdCorpus, out: *mut usize) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = corpus_arg(corpus, "corpus")?.sentences.len();
        Ok(())
    })
}

/// Number of syntactic words (multiword ranges and empty nodes excluded).
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_corpus_token_count(corpus: *const LatstdCorpus, out: *mut usize) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = corpus_arg(corpus, "corpus")?
            .sentences
            .iter()
            .map(Sentence::token_count)
            .sum();
        Ok(())
    })
}

/// Standardizes and harmonizes a corpus with default options into a new
/// handle.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_corpus_convert(
    corpus: *const LatstdCorpus,
    flavor: LatstdFlavor,
    out: *mut *mut LatstdCorpus,
) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        let c = corpus_arg(corpus, "corpus")?;
        let converted = convert_corpus(&c.sentences, &ConvertOptions::new(flavor.into()));
        *out = Box::into_raw(Box::new(LatstdCorpus {
            sentences: converted.sentences,
        }));
        Ok(())
    })
}

/// Whole-string morphological accuracy of `pred` against `gold`.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_eval_accuracy(
    gold: *const LatstdCorpus,
    pred: *const LatstdCorpus,
    include_upos: bool,
    out: *mut f64,
) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        let (g, p) = (corpus_arg(gold, "gold")?, corpus_arg(pred, "pred")?);
        *out = whole_string_accuracy(&g.sentences, &p.sentences, include_upos).map_err(lib_err)?;
        Ok(())
    })
}

/// Macro F1 of one feature (`UPOS` or a morphological feature name).
///
/// # Safety
/// Both handles must be live; `feature` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_eval_macro_f1(
    gold: *const LatstdCorpus,
    pred: *const LatstdCorpus,
    feature: *const c_char,
    out: *mut f64,
) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        let (g, p) = (corpus_arg(gold, "gold")?, corpus_arg(pred, "pred")?);
        let feature = str_arg(feature, "feature")?;
        *out = macro_f1(&g.sentences, &p.sentences, feature).map_err(lib_err)?;
        Ok(())
    })
}

/// Paired permutation test; writes the p-value. `metric` uses the CLI
/// syntax (`morph-acc`, `upos-acc`, `macro-f1:Case`, `f1:Case=Dat`).
///
/// # Safety
/// All handles must be live; `metric` NUL-terminated; `p_value` writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_permutation_test(
    gold: *const LatstdCorpus,
    pred_a: *const LatstdCorpus,
    pred_b: *const LatstdCorpus,
    metric: *const c_char,
    iterations: u64,
    seed: u64,
    jobs: usize,
    p_value: *mut f64,
) -> LatstdStatus {
    guard(|| {
        out_arg(p_value, "p_value")?;
        let g = corpus_arg(gold, "gold")?;
        let a = corpus_arg(pred_a, "pred_a")?;
        let b = corpus_arg(pred_b, "pred_b")?;
        let metric: Metric = str_arg(metric, "metric")?.parse().map_err(lib_err)?;
        let r = permutation_test(&g.sentences, &a.sentences, &b.sentences, &metric, iterations, seed, jobs)
            .map_err(lib_err)?;
        *p_value = r.p_value;
        Ok(())
    })
}

/// Replaces j/v with i/u, preserving case.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn latstd_jv_replace(text: *const c_char, out: *mut *mut c_char) -> LatstdStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = c_string(jv_replace(str_arg(text, "text")?))?;
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn latstd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
