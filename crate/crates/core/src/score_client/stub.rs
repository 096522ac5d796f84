//! A minimal local HTTP endpoint for exercising the client without a real
//! scoring service.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct RecordedRequest {
    pub received_at: Instant,
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

/// `(request index, body) -> (status, response body)`
pub type Handler = dyn Fn(usize, &str) -> (u16, String) + Send + Sync;

/// Serves one request per connection on an ephemeral localhost port.
pub struct StubEndpoint {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<RecordedRequest>>>,
    stop: Arc<AtomicBool>,
    worker: Option<JoinHandle<()>>,
}

impl StubEndpoint {
    pub fn start<F>(handler: F) -> std::io::Result<Self>
    where
        F: Fn(usize, &str) -> (u16, String) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let handler: Arc<Handler> = Arc::new(handler);
        let (reqs, stop_flag) = (Arc::clone(&requests), Arc::clone(&stop));
        let worker = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if stop_flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                if let Err(e) = serve(stream, &reqs, handler.as_ref()) {
                    log::debug!("stub connection error: {e}");
                }
            }
        });
        Ok(StubEndpoint {
            addr,
            requests,
            stop,
            worker: Some(worker),
        })
    }

    /// A stub answering every request with the same five scores.
    pub fn fixed(
        valence: f64,
        joy: f64,
        anger: f64,
        fear: f64,
        sadness: f64,
    ) -> std::io::Result<Self> {
        let body = format!(
            r#"{{"valence": {valence}, "joy": {joy}, "anger": {anger}, "fear": {fear}, "sadness": {sadness}}}"#
        );
        Self::start(move |_, _| (200, body.clone()))
    }

    pub fn url(&self) -> String {
        format!("http://{}/score", self.addr)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.requests.lock().expect("stub lock poisoned").clone()
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().expect("stub lock poisoned").len()
    }
}

impl Drop for StubEndpoint {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn serve(
    stream: TcpStream,
    log: &Mutex<Vec<RecordedRequest>>,
    handler: &Handler,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    if reader.read_line(&mut request_line)? == 0 {
        return Ok(());
    }
    let received_at = Instant::now();
    let path = request_line
        .split_whitespace()
        .nth(1)
        .unwrap_or("/")
        .to_string();
    let mut headers = Vec::new();
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
        if let Some((k, v)) = line.trim_end().split_once(':') {
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
            if k == "content-length" {
                content_length = v.parse().unwrap_or(0);
            }
            headers.push((k, v));
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let body = String::from_utf8_lossy(&body).into_owned();

    let index = {
        let mut log = log.lock().expect("stub lock poisoned");
        log.push(RecordedRequest {
            received_at,
            path,
            headers,
            body: body.clone(),
        });
        log.len() - 1
    };
    let (status, response) = handler(index, &body);
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} STUB\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{response}",
        response.len()
    )?;
    stream.flush()
}
