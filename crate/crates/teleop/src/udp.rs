//! The wire codec over real UDP sockets.

use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use teleop_core::netsim::{
    decode_packet, encode_packet, Link, LinkError, Packet, DEFAULT_PORT_BACKWARD,
    DEFAULT_PORT_FORWARD,
};

/// Addresses the slave listens on (`forward`) and the master listens on (`backward`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UdpEndpoints {
    pub forward: SocketAddr,
    pub backward: SocketAddr,
}

impl Default for UdpEndpoints {
    fn default() -> Self {
        Self {
            forward: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT_FORWARD)),
            backward: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT_BACKWARD)),
        }
    }
}

fn resolve(s: &str) -> Result<SocketAddr, String> {
    s.trim()
        .to_socket_addrs()
        .map_err(|e| format!("`{s}`: {e}"))?
        .next()
        .ok_or_else(|| format!("`{s}` resolves to nothing"))
}

impl FromStr for UdpEndpoints {
    type Err = String;

    /// `FORWARD_HOST:PORT,BACKWARD_HOST:PORT`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (f, b) = s
            .split_once(',')
            .ok_or_else(|| "expected two host:port pairs separated by `,`".to_string())?;
        Ok(Self {
            forward: resolve(f)?,
            backward: resolve(b)?,
        })
    }
}

/// A socket bound locally that sends to one peer. A background thread decodes arriving
/// datagrams; malformed ones are counted and dropped.
#[derive(Debug)]
pub struct UdpLink {
    socket: UdpSocket,
    peer: SocketAddr,
    inbox: Receiver<Packet>,
    rejected: Arc<AtomicU64>,
    stop: Arc<AtomicBool>,
    reader: Option<JoinHandle<()>>,
}

impl UdpLink {
    pub fn bind(local: SocketAddr, peer: SocketAddr) -> std::io::Result<Self> {
        let socket = UdpSocket::bind(local)?;
        let rx_socket = socket.try_clone()?;
        rx_socket.set_read_timeout(Some(Duration::from_millis(20)))?;
        let (tx, inbox) = mpsc::channel();
        let rejected = Arc::new(AtomicU64::new(0));
        let stop = Arc::new(AtomicBool::new(false));
        let reader = {
            let (rejected, stop) = (rejected.clone(), stop.clone());
            std::thread::spawn(move || {
                let mut buf = [0u8; 2048];
                while !stop.load(Ordering::Relaxed) {
                    let Ok(n) = rx_socket.recv(&mut buf) else {
                        continue;
                    };
                    match decode_packet(&buf[..n]) {
                        Ok(p) => {
                            if tx.send(p).is_err() {
                                break;
                            }
                        }
                        Err(_) => {
                            rejected.fetch_add(1, Ordering::Relaxed);
                        }
                    }
                }
            })
        };
        Ok(Self {
            socket,
            peer,
            inbox,
            rejected,
            stop,
            reader: Some(reader),
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    /// Datagrams that failed to decode.
    pub fn rejected(&self) -> u64 {
        self.rejected.load(Ordering::Relaxed)
    }
}

impl Link for UdpLink {
    fn send(&mut self, packet: Packet, _now: f64) -> Result<(), LinkError> {
        let bytes = encode_packet(&packet)?;
        self.socket
            .send_to(&bytes, self.peer)
            .map(|_| ())
            .map_err(|e| LinkError::Transport(e.to_string()))
    }

    fn poll(&mut self, _now: f64) -> Vec<Packet> {
        self.inbox.try_iter().collect()
    }
}

impl Drop for UdpLink {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.reader.take() {
            let _ = h.join();
        }
    }
}
