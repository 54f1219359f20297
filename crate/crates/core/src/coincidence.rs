//! Synthetic 16-channel timestamp streams, the per-agent veto filter, and
//! fourfold coincidence search.
//!
//! Times are integer picoseconds. Streams are ordered by `(t, channel)`.
//!
//! * Veto: an event is dropped when another event of the same agent lies
//!   within the window (`|Δt| ≤ window`), so every surviving event is the
//!   only detection of its agent in that span.
//! * Fourfold: one event per agent with `max t − min t ≤ window`. A fourfold
//!   is reported when its last event (in stream order) arrives.
//!
//! Both stages are streaming with memory bounded by the events of one window
//! span, and give the same output however the input is chunked.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::qsim::Basis;
use crate::{par, seed};

pub const AGENTS: usize = 4;
pub const CHANNELS: usize = 16;
pub const PS_PER_S: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimestampEvent {
    pub t: u64,
    pub channel: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelAssignment {
    pub agent: usize,
    pub basis: Basis,
    pub outcome: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMap {
    entries: Vec<ChannelAssignment>,
}

impl Default for ChannelMap {
    fn default() -> Self {
        Self::agent_major()
    }
}

impl ChannelMap {
    /// `channel = 4·agent + 2·basis + outcome`, basis 0 = computational.
    pub fn agent_major() -> Self {
        let entries = (0..CHANNELS)
            .map(|c| ChannelAssignment {
                agent: c / 4,
                basis: if (c >> 1) & 1 == 1 { Basis::Hadamard } else { Basis::Computational },
                outcome: (c & 1) as u8,
            })
            .collect();
        Self { entries }
    }

    pub fn new(entries: Vec<ChannelAssignment>) -> Result<Self> {
        contract!(entries.len() == CHANNELS, "channel map needs {CHANNELS} entries");
        let mut seen = [false; CHANNELS];
        for e in &entries {
            contract!(e.agent < AGENTS && e.outcome <= 1, "bad channel assignment {e:?}");
            let slot = e.agent * 4 + usize::from(e.basis.is_hadamard()) * 2 + usize::from(e.outcome);
            contract!(!seen[slot], "channel map is not a bijection ({e:?} repeated)");
            seen[slot] = true;
        }
        Ok(Self { entries })
    }

    pub fn lookup(&self, channel: u8) -> ChannelAssignment {
        self.entries[usize::from(channel)]
    }

    pub fn agent_of(&self, channel: u8) -> usize {
        self.entries[usize::from(channel)].agent
    }

    pub fn channel_of(&self, agent: usize, basis: Basis, outcome: u8) -> u8 {
        self.entries
            .iter()
            .position(|e| e.agent == agent && e.basis == basis && e.outcome == outcome & 1)
            .expect("bijective map") as u8
    }

    /// `channels=a0C0,a0C1,...` (entry `c` describes channel `c`).
    pub fn to_header(&self) -> String {
        let body: Vec<String> =
            self.entries.iter().map(|e| format!("a{}{}{}", e.agent, e.basis.symbol(), e.outcome)).collect();
        format!("channels={}", body.join(","))
    }

    pub fn from_header(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("channels=")
            .ok_or_else(|| Error::StreamFormat(format!("missing channel map in `{s}`")))?;
        let entries = body
            .split(',')
            .map(|tok| {
                let b = tok.as_bytes();
                if b.len() != 4 || b[0] != b'a' {
                    return Err(Error::StreamFormat(format!("bad channel entry `{tok}`")));
                }
                let agent = usize::from(b[1].wrapping_sub(b'0'));
                let basis = match b[2] {
                    b'C' => Basis::Computational,
                    b'H' => Basis::Hadamard,
                    _ => return Err(Error::StreamFormat(format!("bad basis in `{tok}`"))),
                };
                let outcome = b[3].wrapping_sub(b'0');
                Ok(ChannelAssignment { agent, basis, outcome })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries).map_err(|e| Error::StreamFormat(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub pulse_rate_hz: f64,
    pub fourfold_rate_hz: f64,
    pub dark_rate_hz: f64,
    pub jitter_ps: f64,
    pub window_ps: u64,
    pub duration_s: f64,
}

impl Default for StreamConfig {
    /// 76 MHz pulses, 0.3 fourfolds/s, 300 dark counts/s per channel, 1 ns window.
    fn default() -> Self {
        Self {
            pulse_rate_hz: 76e6,
            fourfold_rate_hz: 0.3,
            dark_rate_hz: 300.0,
            jitter_ps: 50.0,
            window_ps: 1_000,
            duration_s: 10.0,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        contract!(self.pulse_rate_hz > 0.0, "pulse rate must be positive");
        contract!(self.fourfold_rate_hz >= 0.0, "fourfold rate must be ≥ 0");
        contract!(self.dark_rate_hz >= 0.0, "dark rate must be ≥ 0");
        contract!(self.jitter_ps >= 0.0, "jitter must be ≥ 0");
        contract!(self.window_ps > 0, "window must be positive");
        contract!(self.duration_s >= 0.0, "duration must be ≥ 0");
        Ok(())
    }

    pub fn pulse_period_ps(&self) -> f64 {
        PS_PER_S / self.pulse_rate_hz
    }

    pub fn duration_ps(&self) -> u64 {
        (self.duration_s * PS_PER_S).round() as u64
    }
}

/// A fourfold detection to plant on pulse `pulse`, with each agent's
/// `(basis, outcome)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedFourfold {
    pub pulse: u64,
    pub detections: [(Basis, u8); AGENTS],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FourfoldEvent {
    /// `(channel, t)` per agent, indexed by agent.
    pub hits: [(u8, u64); AGENTS],
    pub window_ps: u64,
}

impl FourfoldEvent {
    pub fn span(&self) -> u64 {
        let ts = self.hits.iter().map(|h| h.1);
        ts.clone().max().unwrap_or(0) - ts.min().unwrap_or(0)
    }

    /// Per-agent `(basis, outcome)` as seen by the Verifier.
    pub fn detections(&self, map: &ChannelMap) -> [(Basis, u8); AGENTS] {
        self.hits.map(|(c, _)| {
            let a = map.lookup(c);
            (a.basis, a.outcome)
        })
    }

    /// Last event in stream order.
    fn latest(&self) -> (u64, u8) {
        self.hits.iter().map(|&(c, t)| (t, c)).max().expect("four hits")
    }
}

/// Planned fourfolds at `fourfold_rate_hz` (Poisson arrivals snapped to the
/// pulse grid, one per pulse at most) with detections from `detections`.
pub fn plan_fourfolds<F>(config: &StreamConfig, rng_seed: u64, mut detections: F) -> Result<Vec<PlantedFourfold>>
where
    F: FnMut(usize) -> [(Basis, u8); AGENTS],
{
    config.validate()?;
    let mut rng = seed::rng_for(rng_seed, "plan-fourfolds", 0);
    let mut out = Vec::new();
    if config.fourfold_rate_hz == 0.0 {
        return Ok(out);
    }
    let period = config.pulse_period_ps();
    let mut t = 0.0f64;
    let end = config.duration_ps() as f64;
    let mut last_pulse = None;
    loop {
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / config.fourfold_rate_hz * PS_PER_S;
        if t >= end {
            break;
        }
        let pulse = (t / period).floor() as u64;
        if last_pulse == Some(pulse) {
            continue;
        }
        last_pulse = Some(pulse);
        out.push(PlantedFourfold { pulse, detections: detections(out.len()) });
    }
    Ok(out)
}

/// Plants the given detections on evenly spaced pulses `spacing_pulses` apart.
pub fn plant_sequence(detections: &[[(Basis, u8); AGENTS]], spacing_pulses: u64) -> Vec<PlantedFourfold> {
    detections
        .iter()
        .enumerate()
        .map(|(i, d)| PlantedFourfold { pulse: (i as u64 + 1) * spacing_pulses, detections: *d })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedStream {
    pub events: Vec<TimestampEvent>,
    /// Planted fourfolds as placed (after jitter), in stream order.
    pub truth: Vec<FourfoldEvent>,
    pub dark_counts: u64,
}

/// Planted fourfolds with Gaussian jitter plus Poisson dark counts on every
/// channel, merged into one sorted stream. Dark counts are generated per
/// channel (in parallel) from channel-keyed seeds.
pub fn generate_stream(
    config: &StreamConfig,
    map: &ChannelMap,
    planted: &[PlantedFourfold],
    rng_seed: u64,
) -> Result<GeneratedStream> {
    config.validate()?;
    let duration = config.duration_ps();
    let mean = config.dark_rate_hz * config.duration_s;
    let dark: Vec<Vec<TimestampEvent>> = par::map_indexed(CHANNELS as u64, |c| {
        let mut rng = seed::rng_for(rng_seed, "dark-counts", c);
        let count = if mean > 0.0 { Poisson::new(mean).map(|p| p.sample(&mut rng) as u64).unwrap_or(0) } else { 0 };
        (0..count).map(|_| TimestampEvent { t: rng.random_range(0..duration.max(1)), channel: c as u8 }).collect()
    });
    let dark_counts = dark.iter().map(|v| v.len() as u64).sum();

    let period = config.pulse_period_ps();
    let jitter = Normal::new(0.0, config.jitter_ps).map_err(|e| Error::Config(format!("jitter: {e}")))?;
    let mut rng = seed::rng_for(rng_seed, "jitter", 0);
    let mut truth = Vec::with_capacity(planted.len());
    let mut events: Vec<TimestampEvent> = Vec::with_capacity(dark_counts as usize + 4 * planted.len());
    for p in planted {
        let base = p.pulse as f64 * period;
        let mut hits = [(0u8, 0u64); AGENTS];
        for (agent, &(basis, outcome)) in p.detections.iter().enumerate() {
            let channel = map.channel_of(agent, basis, outcome);
            let t = (base + jitter.sample(&mut rng)).round().max(0.0) as u64;
            hits[agent] = (channel, t);
            events.push(TimestampEvent { t, channel });
        }
        truth.push(FourfoldEvent { hits, window_ps: config.window_ps });
    }
    events.extend(dark.into_iter().flatten());
    par::sort_unstable(&mut events);
    truth.sort_by_key(|f| f.latest());
    Ok(GeneratedStream { events, truth, dark_counts })
}

/// Streaming veto stage.
#[derive(Clone, Debug)]
pub struct VetoFilter {
    window: u64,
    agent_of: [usize; CHANNELS],
    queue: VecDeque<(TimestampEvent, bool)>,
    base: u64,
    next: u64,
    last: [Option<(u64, u64)>; AGENTS],
    prev: Option<TimestampEvent>,
    peak: usize,
}

impl VetoFilter {
    pub fn new(window: u64, map: &ChannelMap) -> Self {
        let mut agent_of = [0; CHANNELS];
        for (c, a) in agent_of.iter_mut().enumerate() {
            *a = map.agent_of(c as u8);
        }
        Self { window, agent_of, queue: VecDeque::new(), base: 0, next: 0, last: [None; AGENTS], prev: None, peak: 0 }
    }

    pub fn push(&mut self, e: TimestampEvent, out: &mut Vec<TimestampEvent>) -> Result<()> {
        contract!(usize::from(e.channel) < CHANNELS, "channel {} out of range", e.channel);
        if let Some(p) = self.prev {
            contract!(p <= e, "stream not sorted at t = {}", e.t);
        }
        self.prev = Some(e);
        while let Some(&(front, vetoed)) = self.queue.front() {
            if front.t + self.window >= e.t {
                break;
            }
            self.queue.pop_front();
            self.base += 1;
            if !vetoed {
                out.push(front);
            }
        }
        let agent = self.agent_of[usize::from(e.channel)];
        let mut vetoed = false;
        if let Some((seq, t)) = self.last[agent] {
            if e.t - t <= self.window {
                vetoed = true;
                if seq >= self.base {
                    self.queue[(seq - self.base) as usize].1 = true;
                }
            }
        }
        self.queue.push_back((e, vetoed));
        self.last[agent] = Some((self.next, e.t));
        self.next += 1;
        self.peak = self.peak.max(self.queue.len());
        Ok(())
    }

    pub fn finish(&mut self, out: &mut Vec<TimestampEvent>) {
        for (e, vetoed) in self.queue.drain(..) {
            if !vetoed {
                out.push(e);
            }
        }
        self.base = self.next;
    }

    /// Largest number of buffered events so far.
    pub fn peak_buffer(&self) -> usize {
        self.peak
    }
}

/// Streaming fourfold search.
#[derive(Clone, Debug)]
pub struct FourfoldFinder {
    window: u64,
    agent_of: [usize; CHANNELS],
    buffer: VecDeque<TimestampEvent>,
    peak: usize,
}

impl FourfoldFinder {
    pub fn new(window: u64, map: &ChannelMap) -> Self {
        let mut agent_of = [0; CHANNELS];
        for (c, a) in agent_of.iter_mut().enumerate() {
            *a = map.agent_of(c as u8);
        }
        Self { window, agent_of, buffer: VecDeque::new(), peak: 0 }
    }

    pub fn push(&mut self, e: TimestampEvent, out: &mut Vec<FourfoldEvent>) {
        while let Some(front) = self.buffer.front() {
            if front.t + self.window >= e.t {
                break;
            }
            self.buffer.pop_front();
        }
        let agent = self.agent_of[usize::from(e.channel)];
        let mut per_agent: [Vec<TimestampEvent>; AGENTS] = Default::default();
        for b in &self.buffer {
            let a = self.agent_of[usize::from(b.channel)];
            if a != agent {
                per_agent[a].push(*b);
            }
        }
        if per_agent.iter().enumerate().all(|(a, v)| a == agent || !v.is_empty()) {
            let start = out.len();
            let mut hits = [(0u8, 0u64); AGENTS];
            hits[agent] = (e.channel, e.t);
            combine(&per_agent, agent, 0, &mut hits, self.window, out);
            out[start..].sort_unstable();
        }
        self.buffer.push_back(e);
        self.peak = self.peak.max(self.buffer.len());
    }

    pub fn peak_buffer(&self) -> usize {
        self.peak
    }
}

fn combine(
    per_agent: &[Vec<TimestampEvent>; AGENTS],
    skip: usize,
    a: usize,
    hits: &mut [(u8, u64); AGENTS],
    window: u64,
    out: &mut Vec<FourfoldEvent>,
) {
    if a == AGENTS {
        out.push(FourfoldEvent { hits: *hits, window_ps: window });
        return;
    }
    if a == skip {
        return combine(per_agent, skip, a + 1, hits, window, out);
    }
    for e in &per_agent[a] {
        hits[a] = (e.channel, e.t);
        combine(per_agent, skip, a + 1, hits, window, out);
    }
}

/// Veto followed by fourfold search, fed in arbitrary chunks.
#[derive(Clone, Debug)]
pub struct CoincidencePipeline {
    veto: VetoFilter,
    finder: FourfoldFinder,
    scratch: Vec<TimestampEvent>,
    survivors: u64,
}

impl CoincidencePipeline {
    pub fn new(window: u64, map: &ChannelMap) -> Self {
        Self {
            veto: VetoFilter::new(window, map),
            finder: FourfoldFinder::new(window, map),
            scratch: Vec::new(),
            survivors: 0,
        }
    }

    pub fn push_chunk(&mut self, chunk: &[TimestampEvent], out: &mut Vec<FourfoldEvent>) -> Result<()> {
        for &e in chunk {
            self.veto.push(e, &mut self.scratch)?;
        }
        self.drain(out);
        Ok(())
    }

    pub fn finish(&mut self, out: &mut Vec<FourfoldEvent>) {
        self.veto.finish(&mut self.scratch);
        self.drain(out);
    }

    fn drain(&mut self, out: &mut Vec<FourfoldEvent>) {
        self.survivors += self.scratch.len() as u64;
        for e in self.scratch.drain(..) {
            self.finder.push(e, out);
        }
    }

    /// Events that survived the veto so far.
    pub fn survivors(&self) -> u64 {
        self.survivors
    }

    /// Largest buffer held by either stage.
    pub fn peak_buffer(&self) -> usize {
        self.veto.peak_buffer().max(self.finder.peak_buffer())
    }
}

pub fn veto_filter(stream: &[TimestampEvent], window: u64, map: &ChannelMap) -> Result<Vec<TimestampEvent>> {
    let mut f = VetoFilter::new(window, map);
    let mut out = Vec::with_capacity(stream.len());
    for &e in stream {
        f.push(e, &mut out)?;
    }
    f.finish(&mut out);
    Ok(out)
}

/// Fourfolds of an (already vetoed) sorted stream.
pub fn find_fourfolds(filtered: &[TimestampEvent], window: u64, map: &ChannelMap) -> Vec<FourfoldEvent> {
    let mut f = FourfoldFinder::new(window, map);
    let mut out = Vec::new();
    for &e in filtered {
        f.push(e, &mut out);
    }
    out
}

/// Whole pipeline over a sorted stream, processed `chunk` events at a time.
pub fn process_stream(
    stream: &[TimestampEvent],
    window: u64,
    map: &ChannelMap,
    chunk: usize,
) -> Result<Vec<FourfoldEvent>> {
    contract!(chunk > 0, "chunk size must be positive");
    let mut p = CoincidencePipeline::new(window, map);
    let mut out = Vec::new();
    for c in stream.chunks(chunk) {
        p.push_chunk(c, &mut out)?;
    }
    p.finish(&mut out);
    Ok(out)
}

/// Quadratic reference implementation of veto + fourfold search, used to
/// check the streaming stages.
pub mod reference {
    use super::*;

    pub fn veto(stream: &[TimestampEvent], window: u64, map: &ChannelMap) -> Vec<TimestampEvent> {
        stream
            .iter()
            .enumerate()
            .filter(|(i, e)| {
                !stream.iter().enumerate().any(|(j, o)| {
                    j != *i && map.agent_of(o.channel) == map.agent_of(e.channel) && e.t.abs_diff(o.t) <= window
                })
            })
            .map(|(_, e)| *e)
            .collect()
    }

    pub fn fourfolds(filtered: &[TimestampEvent], window: u64, map: &ChannelMap) -> Vec<FourfoldEvent> {
        let mut out = Vec::new();
        for (i, last) in filtered.iter().enumerate() {
            let la = map.agent_of(last.channel);
            let mut per_agent: [Vec<TimestampEvent>; AGENTS] = Default::default();
            for earlier in &filtered[..i] {
                let a = map.agent_of(earlier.channel);
                if a != la && last.t - earlier.t <= window {
                    per_agent[a].push(*earlier);
                }
            }
            let mut found = Vec::new();
            let mut hits = [(0u8, 0u64); AGENTS];
            hits[la] = (last.channel, last.t);
            enumerate(&per_agent, la, 0, &mut hits, &mut found);
            found.retain(|h: &[(u8, u64); AGENTS]| {
                let max = h.iter().map(|x| x.1).max().unwrap();
                let min = h.iter().map(|x| x.1).min().unwrap();
                max - min <= window
            });
            found.sort_unstable();
            out.extend(found.into_iter().map(|hits| FourfoldEvent { hits, window_ps: window }));
        }
        out
    }

    fn enumerate(
        per_agent: &[Vec<TimestampEvent>; AGENTS],
        skip: usize,
        a: usize,
        hits: &mut [(u8, u64); AGENTS],
        out: &mut Vec<[(u8, u64); AGENTS]>,
    ) {
        if a == AGENTS {
            out.push(*hits);
        } else if a == skip {
            enumerate(per_agent, skip, a + 1, hits, out);
        } else {
            for e in &per_agent[a] {
                hits[a] = (e.channel, e.t);
                enumerate(per_agent, skip, a + 1, hits, out);
            }
        }
    }
}

/// Expected rate (Hz) of accidental N-fold coincidences between `agents`
/// independent Poisson detectors of rate `per_agent_hz` after the veto:
/// `N·R·(R·W)^{N−1}·e^{−2N·R·W}`. Each vetoed-process point survives with
/// probability `e^{−2RW}`, and at most one surviving point of an agent fits in
/// a window, so the chance one lands in `(t, t+W]` is `R·W·e^{−2RW}`.
pub fn accidental_rate(per_agent_hz: f64, window_s: f64, agents: usize) -> f64 {
    let rw = per_agent_hz * window_s;
    let survive = (-2.0 * rw).exp();
    agents as f64 * per_agent_hz * survive * (rw * survive).powi(agents as i32 - 1)
}

const MAGIC: &str = "GHZVOTE-STREAM v1";
const RECORD_BYTES: usize = 9;

/// Header line `GHZVOTE-STREAM v1 channels=...` then 9-byte little-endian
/// records `(channel: u8, t: u64)`.
pub fn write_stream<W: Write>(mut w: W, map: &ChannelMap, events: &[TimestampEvent]) -> Result<()> {
    writeln!(w, "{MAGIC} {}", map.to_header())?;
    let mut buf = Vec::with_capacity(events.len() * RECORD_BYTES);
    for e in events {
        buf.push(e.channel);
        buf.extend_from_slice(&e.t.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_stream<R: BufRead>(mut r: R) -> Result<(ChannelMap, Vec<TimestampEvent>)> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let rest =
        header.trim_end().strip_prefix(MAGIC).ok_or_else(|| Error::StreamFormat("missing stream header".into()))?;
    let map = ChannelMap::from_header(rest)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % RECORD_BYTES != 0 {
        return Err(Error::StreamFormat(format!("{} trailing bytes", bytes.len() % RECORD_BYTES)));
    }
    let events = bytes
        .chunks_exact(RECORD_BYTES)
        .map(|rec| {
            let channel = rec[0];
            let t = u64::from_le_bytes(rec[1..].try_into().expect("8 bytes"));
            if usize::from(channel) >= CHANNELS {
                return Err(Error::StreamFormat(format!("channel {channel} out of range")));
            }
            Ok(TimestampEvent { t, channel })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((map, events))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(channel: u8, t: u64) -> TimestampEvent {
        TimestampEvent { t, channel }
    }

    #[test]
    fn same_agent_pair_is_vetoed() {
        let map = ChannelMap::agent_major();
        let s = vec![ev(0, 1_000), ev(1, 1_200), ev(4, 1_100), ev(8, 1_100), ev(12, 1_150)];
        let mut s = s;
        s.sort();
        let out = veto_filter(&s, 1_000, &map).unwrap();
        assert!(out.iter().all(|e| map.agent_of(e.channel) != 0));
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn four_agents_in_window_survive() {
        let map = ChannelMap::agent_major();
        let s = vec![ev(0, 100), ev(6, 300), ev(9, 500), ev(15, 900)];
        assert_eq!(veto_filter(&s, 1_000, &map).unwrap(), s);
        let f = find_fourfolds(&s, 1_000, &map);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].hits, [(0, 100), (6, 300), (9, 500), (15, 900)]);
    }

    #[test]
    fn far_apart_dark_counts_survive() {
        let map = ChannelMap::agent_major();
        let s = vec![ev(2, 0), ev(3, 5_000)];
        assert_eq!(veto_filter(&s, 1_000, &map).unwrap(), s);
    }

    #[test]
    fn unsorted_stream_is_rejected() {
        let map = ChannelMap::agent_major();
        assert!(veto_filter(&[ev(0, 10), ev(1, 5)], 100, &map).is_err());
    }

    #[test]
    fn single_planted_fourfold_without_darks() {
        let cfg = StreamConfig { dark_rate_hz: 0.0, duration_s: 1.0, ..Default::default() };
        let planted = plant_sequence(&[[(Basis::Computational, 0); AGENTS]], 1_000);
        let g = generate_stream(&cfg, &ChannelMap::agent_major(), &planted, 3).unwrap();
        assert_eq!(g.events.len(), 4);
        assert_eq!(g.dark_counts, 0);
    }

    #[test]
    fn header_roundtrip_and_bijection() {
        let map = ChannelMap::agent_major();
        assert_eq!(ChannelMap::from_header(&map.to_header()).unwrap(), map);
        let mut entries: Vec<ChannelAssignment> = (0..CHANNELS).map(|c| map.lookup(c as u8)).collect();
        entries[1] = entries[0];
        assert!(ChannelMap::new(entries).is_err());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let map = ChannelMap::agent_major();
        let mut buf = Vec::new();
        write_stream(&mut buf, &map, &[ev(3, 77)]).unwrap();
        buf.pop();
        assert!(read_stream(&buf[..]).is_err());
        assert!(read_stream(&b"nonsense\n"[..]).is_err());
    }
}
