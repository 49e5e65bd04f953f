//! Event calendar and fixed-width weekly windows around event start dates.

use std::io::{Read, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::community::louvain;
use crate::error::{Error, Result};
use crate::graph::{snapshot_stats, Snapshot, TemporalGraph, SECONDS_PER_WEEK};

/// The COP13–COP25 calendar.
pub const BUNDLED_COP_EVENTS: &str = include_str!("../data/cop_events.csv");
pub const DEFAULT_HALF_WIDTH: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopEvent {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub location: String,
}

impl CopEvent {
    /// Week containing the start date at 00:00 UTC. Dates before the epoch
    /// give negative weeks.
    pub fn anchor_week(&self) -> i64 {
        let ts = self.start.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp();
        ts.div_euclid(SECONDS_PER_WEEK)
    }
}

/// Reads a `name,start,end,location` CSV with ISO-8601 dates, sorted by
/// start date. Row numbers in errors count the header as row 1.
pub fn load_events<R: Read>(input: R) -> Result<Vec<CopEvent>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != ["name", "start", "end", "location"] {
        return Err(Error::Config(format!(
            "events header must be name,start,end,location, found {}",
            header.join(",")
        )));
    }
    let mut events = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let bad = |reason: String| Error::Row { row, reason };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let date = |s: &str| {
            NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| bad(format!("bad date {s:?}: {e}")))
        };
        let (start, end) = (date(&rec[1])?, date(&rec[2])?);
        if start > end {
            return Err(bad(format!("start {start} is after end {end}")));
        }
        events.push(CopEvent {
            name: rec[0].trim().to_string(),
            start,
            end,
            location: rec[3].trim().to_string(),
        });
    }
    events.sort_by(|a, b| a.start.cmp(&b.start).then_with(|| a.name.cmp(&b.name)));
    Ok(events)
}

pub fn bundled_events() -> Vec<CopEvent> {
    load_events(BUNDLED_COP_EVENTS.as_bytes()).expect("bundled calendar is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSlot<'g> {
    pub week: i64,
    /// Weeks relative to the anchor, `-w..=w`.
    pub offset: i64,
    pub snapshot: Option<&'g Snapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow<'g> {
    pub event: CopEvent,
    pub anchor_week: i64,
    pub slots: Vec<WindowSlot<'g>>,
}

pub fn event_window<'g>(g: &'g TemporalGraph, event: &CopEvent, half_width: u32) -> EventWindow<'g> {
    let anchor_week = event.anchor_week();
    let w = i64::from(half_width);
    let slots = (-w..=w)
        .map(|offset| {
            let week = anchor_week + offset;
            let snapshot = u64::try_from(week).ok().and_then(|wk| g.snapshot_at(wk));
            WindowSlot { week, offset, snapshot }
        })
        .collect();
    EventWindow { event: event.clone(), anchor_week, slots }
}

/// One report line; metric fields are `None` for missing weeks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRow {
    pub event: String,
    pub week: i64,
    pub offset: i64,
    pub num_nodes: Option<usize>,
    pub num_edges: Option<usize>,
    pub density: Option<f64>,
    pub num_communities: Option<usize>,
    pub modularity: Option<f64>,
}

pub fn window_report(win: &EventWindow<'_>, seed: u64) -> Result<Vec<WindowRow>> {
    win.slots
        .par_iter()
        .map(|slot| {
            let mut row = WindowRow {
                event: win.event.name.clone(),
                week: slot.week,
                offset: slot.offset,
                num_nodes: None,
                num_edges: None,
                density: None,
                num_communities: None,
                modularity: None,
            };
            if let Some(snap) = slot.snapshot {
                let st = snapshot_stats(snap);
                row.num_nodes = Some(st.num_nodes);
                row.num_edges = Some(st.num_edges);
                row.density = Some(st.density);
                if st.total_weight > 0.0 {
                    let part = louvain(snap, seed)?.final_partition;
                    row.num_communities = Some(part.num_communities());
                    row.modularity = Some(part.modularity());
                }
            }
            Ok(row)
        })
        .collect()
}

/// Writes `event,week,offset,num_nodes,num_edges,density,num_communities,modularity`
/// with empty fields for missing weeks.
pub fn write_window_report_csv<W: Write>(out: W, rows: &[WindowRow]) -> Result<()> {
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "event",
        "week",
        "offset",
        "num_nodes",
        "num_edges",
        "density",
        "num_communities",
        "modularity",
    ])?;
    for r in rows {
        w.write_record([
            r.event.clone(),
            r.week.to_string(),
            r.offset.to_string(),
            opt(r.num_nodes),
            opt(r.num_edges),
            opt(r.density),
            opt(r.num_communities),
            opt(r.modularity),
        ])?;
    }
    w.flush()?;
    Ok(())
}
