//! Schedule records as CSV: `taskId,resourceId,agentId,start,end`.

use std::io::{Read, Write};

use super::{FinalSchedule, Placement};
use crate::error::{Error, Result};

pub fn write_schedule_csv<W: Write>(schedule: &FinalSchedule, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if schedule.placements.is_empty() {
        writer.write_record(["taskId", "resourceId", "agentId", "start", "end"])?;
    }
    for placement in &schedule.placements {
        writer.serialize(placement)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads placements in file order; does not re-sort.
pub fn read_schedule_csv<R: Read>(input: R) -> Result<Vec<Placement>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut placements = Vec::new();
    for (i, row) in reader.deserialize().enumerate() {
        let placement: Placement = row.map_err(|e| Error::Schedule(format!("record {}: {e}", i + 1)))?;
        if placement.end < placement.start {
            return Err(Error::Schedule(format!(
                "record {}: task `{}` ends before it starts",
                i + 1,
                placement.task_id
            )));
        }
        placements.push(placement);
    }
    Ok(placements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::Seconds;

    #[test]
    fn csv_round_trip() {
        let schedule = FinalSchedule {
            placements: vec![Placement {
                task_id: "1".into(),
                resource_id: "P01".into(),
                agent_id: "agent1".into(),
                start: Seconds::from_millis(1500),
                end: Seconds::from_secs(4),
            }],
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_schedule_csv(&schedule, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "taskId,resourceId,agentId,start,end\n1,P01,agent1,1.5,4\n");
        assert_eq!(read_schedule_csv(&buf[..]).unwrap(), schedule.placements);
    }

    #[test]
    fn empty_schedule_keeps_header() {
        let mut buf = Vec::new();
        write_schedule_csv(&FinalSchedule::default(), &mut buf).unwrap();
        assert_eq!(buf, b"taskId,resourceId,agentId,start,end\n");
        assert!(read_schedule_csv(&buf[..]).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_rows() {
        let text = "taskId,resourceId,agentId,start,end\n1,P,a,5,x\n";
        assert!(read_schedule_csv(text.as_bytes()).is_err());
        let text = "taskId,resourceId,agentId,start,end\n1,P,a,5,4\n";
        assert!(read_schedule_csv(text.as_bytes()).is_err());
    }
}
