//! Local HTTP fixtures: a forward-proxy-style test server and a synthetic site corpus.
//!
//! The server answers both origin-form and absolute-form requests, so one
//! instance can stand in for a vantage-point proxy in front of many hosts.

use std::fmt::Write as _;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureRequest {
    pub method: String,
    /// Lowercased, without port.
    pub host: String,
    /// Path and query.
    pub path: String,
    pub headers: Vec<(String, String)>,
}

impl FixtureRequest {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn query_param(&self, key: &str) -> Option<&str> {
        let (_, q) = self.path.split_once('?')?;
        q.split('&')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }

    pub fn path_only(&self) -> &str {
        self.path.split('?').next().unwrap_or("/")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl FixtureResponse {
    pub fn html(body: impl Into<String>) -> Self {
        FixtureResponse {
            status: 200,
            headers: vec![("Content-Type".into(), "text/html; charset=utf-8".into())],
            body: body.into().into_bytes(),
        }
    }

    pub fn status(status: u16) -> Self {
        FixtureResponse {
            status,
            headers: vec![("Content-Type".into(), "text/plain".into())],
            body: format!("status {status}\n").into_bytes(),
        }
    }

    pub fn redirect(location: &str) -> Self {
        FixtureResponse {
            status: 302,
            headers: vec![("Location".into(), location.into())],
            body: Vec::new(),
        }
    }

    pub fn with_header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }

    pub fn with_cookie(self, set_cookie: &str) -> Self {
        self.with_header("Set-Cookie", set_cookie)
    }
}

pub type Handler = Arc<dyn Fn(&FixtureRequest) -> FixtureResponse + Send + Sync>;

/// A threaded HTTP/1.1 server on 127.0.0.1 that logs every request.
pub struct FixtureServer {
    addr: SocketAddr,
    log: Arc<Mutex<Vec<FixtureRequest>>>,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl FixtureServer {
    pub fn start(handler: Handler) -> io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let log = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let (log2, stop2) = (Arc::clone(&log), Arc::clone(&stop));
        let thread = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if stop2.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let (handler, log) = (Arc::clone(&handler), Arc::clone(&log2));
                std::thread::spawn(move || {
                    let _ = serve(stream, &handler, &log);
                });
            }
        });
        Ok(FixtureServer {
            addr,
            log,
            stop,
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:<port>`, usable as a proxy URL or a direct base URL.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests(&self) -> Vec<FixtureRequest> {
        self.log.lock().expect("log lock").clone()
    }

    pub fn hits(&self, host: &str) -> usize {
        self.log
            .lock()
            .expect("log lock")
            .iter()
            .filter(|r| r.host == host)
            .count()
    }

    pub fn clear_log(&self) {
        self.log.lock().expect("log lock").clear();
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect_timeout(&self.addr, Duration::from_secs(1));
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        204 => "No Content",
        301 => "Moved Permanently",
        302 => "Found",
        400 => "Bad Request",
        404 => "Not Found",
        500 => "Internal Server Error",
        502 => "Bad Gateway",
        503 => "Service Unavailable",
        _ => "Status",
    }
}

fn serve(stream: TcpStream, handler: &Handler, log: &Mutex<Vec<FixtureRequest>>) -> io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    if reader.read_line(&mut line)? == 0 {
        return Ok(());
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or("").to_string();
    let target = parts.next().unwrap_or("/").to_string();
    let mut headers = Vec::new();
    loop {
        let mut h = String::new();
        if reader.read_line(&mut h)? == 0 || h.trim().is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            headers.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let mut out = stream;
    if method.eq_ignore_ascii_case("CONNECT") {
        out.write_all(
            b"HTTP/1.1 502 Bad Gateway\r\nContent-Length: 0\r\nConnection: close\r\n\r\n",
        )?;
        return out.flush();
    }
    let (host, path) = match target.strip_prefix("http://") {
        Some(rest) => match rest.find('/') {
            Some(i) => (rest[..i].to_string(), rest[i..].to_string()),
            None => (rest.to_string(), "/".to_string()),
        },
        None => {
            let host = headers
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case("host"))
                .map(|(_, v)| v.clone())
                .unwrap_or_default();
            (host, target.clone())
        }
    };
    let host = host.split(':').next().unwrap_or("").to_ascii_lowercase();
    let req = FixtureRequest {
        method,
        host,
        path,
        headers,
    };
    let resp = handler(&req);
    log.lock().expect("log lock").push(req);
    let mut head = format!("HTTP/1.1 {} {}\r\n", resp.status, reason(resp.status));
    for (k, v) in &resp.headers {
        let _ = write!(head, "{k}: {v}\r\n");
    }
    let _ = write!(
        head,
        "Content-Length: {}\r\nConnection: close\r\n\r\n",
        resp.body.len()
    );
    out.write_all(head.as_bytes())?;
    out.write_all(&resp.body)?;
    out.flush()
}

/// Banner content planted on one synthetic site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedBanner {
    /// Id or class of the banner element, as it appears in the cookie list.
    pub selector: String,
    pub height_px: u32,
    pub language: &'static str,
    pub html: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSite {
    pub domain: String,
    pub tld: String,
    pub banner: Option<PlantedBanner>,
    /// Persistent cookies set by the third-party sync hop before the page loads.
    pub third_party_cookies: u32,
}

/// Host of the third-party cookie-sync endpoint used by the corpus.
pub const SYNC_HOST: &str = "sync.adnet-metrics.example";

/// Deterministic generated sites with known banner content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub sites: Vec<CorpusSite>,
}

const BANNER_IDS: [&str; 8] = [
    "#cookieNotice",
    "#cookie-notice",
    "#CybotCookiebotDialog",
    "#onetrust-banner-sdk",
    "#cookie-law-info-bar",
    ".cc-window",
    "#cookieScreen",
    ".cookie-banner",
];

struct TldPlan {
    tld: &'static str,
    sites: usize,
    banners: usize,
    heights: &'static [u32],
    language: &'static str,
}

const PLAN: [TldPlan; 4] = [
    TldPlan {
        tld: "nl",
        sites: 10,
        banners: 8,
        heights: &[150, 160, 174, 174, 180, 190, 200, 210],
        language: "nl",
    },
    TldPlan {
        tld: "de",
        sites: 10,
        banners: 6,
        heights: &[70, 80, 86, 86, 90, 100],
        language: "de",
    },
    TldPlan {
        tld: "ca",
        sites: 10,
        banners: 4,
        heights: &[40, 48, 48, 56],
        language: "en",
    },
    TldPlan {
        tld: "com",
        sites: 10,
        banners: 6,
        heights: &[60, 80, 86, 86, 92, 120],
        language: "en",
    },
];

fn banner_text(language: &str, extra: usize) -> (String, Vec<String>) {
    let (text, filler, controls): (&str, &str, Vec<String>) = match language {
        "nl" => (
            "Deze website gebruikt cookies om u de beste ervaring te geven. Door verder te gaan gaat u akkoord met het gebruik van cookies.",
            "Lees ons cookiebeleid voor meer informatie over de cookies die wij gebruiken.",
            vec![
                "<a href=\"/cookiebeleid\">Cookiebeleid</a>".into(),
                "<button type=\"button\">Akkoord</button>".into(),
                "<button type=\"button\">Weigeren</button>".into(),
            ],
        ),
        "de" => (
            "Diese Website verwendet Cookies, um Ihnen die bestmögliche Nutzung zu ermöglichen. Mit der Nutzung der Seite sind Sie damit einverstanden.",
            "Weitere Informationen finden Sie in unserer Datenschutzerklärung.",
            vec![
                "<a href=\"/datenschutz\">Mehr erfahren</a>".into(),
                "<button>OK</button>".into(),
            ],
        ),
        _ => (
            "This website uses cookies to improve your experience. By continuing to browse the site you agree to our use of cookies.",
            "You can find out more about the cookies we use in our policy.",
            vec![
                "<a href=\"/privacy\">Find out more</a>".into(),
                "<input type=\"submit\" value=\"Accept\">".into(),
            ],
        ),
    };
    let mut body = text.to_string();
    for _ in 0..extra {
        body.push(' ');
        body.push_str(filler);
    }
    (body, controls)
}

fn banner_html(selector: &str, height: u32, language: &str, extra: usize) -> String {
    let (text, controls) = banner_text(language, extra);
    let attr = match selector.strip_prefix('#') {
        Some(id) => format!("id=\"{id}\""),
        None => format!("class=\"{}\"", selector.trim_start_matches('.')),
    };
    format!(
        "<div {attr} style=\"position: fixed; bottom: 0; height: {height}px\"><p>{text}</p><p>{}</p></div>",
        controls.join(" ")
    )
}

fn page_html(domain: &str, banner: Option<&PlantedBanner>) -> String {
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{domain}</title></head><body>\
<header class=\"site-header\"><nav><a href=\"/\">Home</a> <a href=\"/news\">News</a> <a href=\"/contact\">Contact</a></nav></header>\
<main id=\"content\"><h1>{domain}</h1><article class=\"story\"><p>Local news, weather and sport.</p></article></main>\
<footer class=\"site-footer\"><p>&copy; 2019 {domain}</p></footer>{}</body></html>\n",
        banner.map(|b| b.html.as_str()).unwrap_or("")
    )
}

impl SyntheticCorpus {
    /// 40 sites over .nl/.de/.ca/.com, 24 of them with a planted banner.
    pub fn standard() -> Self {
        let mut sites = Vec::new();
        let mut selector_cycle = 0usize;
        for plan in &PLAN {
            for i in 0..plan.sites {
                let domain = format!("site{:02}.{}", i + 1, plan.tld);
                let banner = (i < plan.banners).then(|| {
                    let selector = BANNER_IDS[selector_cycle % BANNER_IDS.len()].to_string();
                    selector_cycle += 1;
                    let height = plan.heights[i];
                    PlantedBanner {
                        html: banner_html(&selector, height, plan.language, i % 3),
                        selector,
                        height_px: height,
                        language: plan.language,
                    }
                });
                let third_party_cookies = match (&banner, i % 4) {
                    (Some(_), 0) => 3,
                    (Some(_), 1) => 5,
                    (Some(_), _) => 4,
                    (None, 0) => 0,
                    (None, _) => 1,
                };
                sites.push(CorpusSite {
                    domain,
                    tld: plan.tld.to_string(),
                    banner,
                    third_party_cookies,
                });
            }
        }
        SyntheticCorpus { sites }
    }

    pub fn banner_count(&self) -> usize {
        self.sites.iter().filter(|s| s.banner.is_some()).count()
    }

    pub fn site(&self, domain: &str) -> Option<&CorpusSite> {
        self.sites.iter().find(|s| s.domain == domain)
    }

    pub fn tlds(&self) -> Vec<String> {
        let mut t: Vec<String> = self.sites.iter().map(|s| s.tld.clone()).collect();
        t.sort();
        t.dedup();
        t
    }

    /// `Domain,TLD` CSV with all sites in corpus order.
    pub fn site_csv(&self) -> String {
        let mut out = String::from("GlobalRank,Domain,TLD\n");
        for (i, s) in self.sites.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, s.domain, s.tld);
        }
        out
    }

    /// HTML served at the site's landing page.
    pub fn page(&self, site: &CorpusSite) -> String {
        page_html(&site.domain, site.banner.as_ref())
    }

    /// Request handler serving every corpus host and the sync endpoint.
    pub fn handler(&self) -> Handler {
        let corpus = self.clone();
        Arc::new(move |req: &FixtureRequest| corpus.respond(req))
    }

    fn respond(&self, req: &FixtureRequest) -> FixtureResponse {
        if req.host == SYNC_HOST {
            let Some(domain) = req.query_param("site") else {
                return FixtureResponse::status(400);
            };
            let n: u32 = req
                .query_param("n")
                .and_then(|n| n.parse().ok())
                .unwrap_or(0);
            let mut resp = FixtureResponse::redirect(&format!("http://{domain}/home"))
                .with_cookie("sync_session=1; Path=/");
            for k in 0..n {
                resp = resp.with_cookie(&format!("uid{k}=a{k}; Max-Age=31536000; Path=/"));
            }
            return resp;
        }
        let Some(site) = self.site(&req.host) else {
            return FixtureResponse::status(502);
        };
        match req.path_only() {
            "/" if site.third_party_cookies > 0 => FixtureResponse::redirect(&format!(
                "http://{SYNC_HOST}/sync?site={}&n={}",
                site.domain, site.third_party_cookies
            )),
            "/" | "/home" => FixtureResponse::html(self.page(site))
                .with_cookie("session_id=s1; Path=/")
                .with_cookie("visited=1; Max-Age=31536000; Path=/"),
            _ => FixtureResponse::status(404),
        }
    }

    /// Write `sites.csv` and `crawl.toml` for the corpus under `dir`.
    ///
    /// `vantages` holds (label, proxy url, accept-language) triples.
    pub fn write_crawl_inputs(
        &self,
        dir: &Path,
        vantages: &[(&str, &str, &str)],
        filter_list: &Path,
        workers: usize,
    ) -> io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sites.csv"), self.site_csv())?;
        let mut cfg = format!(
            "workers = {workers}\ntimeout_s = 10\nmax_redirects = 5\ndelay_ms = 0\nschemes = [\"http\"]\nfilter_list = {:?}\n",
            filter_list.display().to_string()
        );
        for tld in self.tlds() {
            let _ = write!(
                cfg,
                "\n[[sites]]\npath = \"sites.csv\"\ntld = \"{tld}\"\nlimit = 100\n"
            );
        }
        for (label, proxy, lang) in vantages {
            let _ = write!(
                cfg,
                "\n[vantage.{label}]\nproxy_url = \"{proxy}\"\naccept_language = \"{lang}\"\n"
            );
        }
        let path = dir.join("crawl.toml");
        std::fs::write(&path, cfg)?;
        Ok(path)
    }
}

const FILLER_CLASSES: [&str; 12] = [
    "row",
    "col",
    "card",
    "nav-item",
    "teaser",
    "meta",
    "ad-slot",
    "sidebar",
    "footer-link",
    "headline",
    "sponsored",
    "widget",
];

/// A content page of at least `min_bytes` of nested markup with one planted
/// `#cookieNotice` banner near the end.
pub fn typical_page(min_bytes: usize) -> String {
    let mut out = String::from(
        "<!DOCTYPE html><html lang=\"en\"><head><title>Typical</title></head><body><div id=\"page\">",
    );
    let mut i = 0usize;
    while out.len() < min_bytes {
        let a = FILLER_CLASSES[i % FILLER_CLASSES.len()];
        let b = FILLER_CLASSES[(i * 7 + 3) % FILLER_CLASSES.len()];
        let _ = write!(
            out,
            "<section class=\"{a} s{i}\"><div class=\"{b}\" id=\"n{i}\"><h2>Item {i}</h2>\
             <p>Lorem ipsum dolor sit amet <a href=\"/p/{i}\">more</a> <span class=\"{a}\">tag</span></p>\
             <ul><li>one</li><li><em>two</em></li></ul></div></section>"
        );
        i += 1;
    }
    out.push_str(
        "<div id=\"cookieNotice\" style=\"height:120px\"><p>We use cookies to improve this site. \
         <a href=\"/privacy\">Privacy</a></p><button>OK</button></div></div></body></html>",
    );
    out
}
