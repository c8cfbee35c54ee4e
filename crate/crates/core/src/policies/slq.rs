//! Serve the current queue exhaustively, then switch to the longest queue.

use crate::engine::{DecisionContext, Policy, PolicyAction};
use crate::instance::QueueId;

/// Stays at a non-empty queue until it is empty, then sets up the queue
/// with the most waiting jobs (ties go to the lowest queue id). Rests at
/// the last queue when the system is empty. The switch waits until every
/// job arriving at the current instant has been seen.
#[derive(Clone, Copy, Debug, Default)]
pub struct LongestQueue;

impl Policy for LongestQueue {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
        if !ctx.is_free() {
            return PolicyAction::IdleUntilNextEvent;
        }
        if let Some(q) = ctx.established() {
            if let Some(job) = ctx.waiting(q).first() {
                return PolicyAction::Serve(job.id);
            }
        }
        if ctx.arrivals_due_now {
            return PolicyAction::IdleUntilNextEvent;
        }
        let longest = ctx
            .queues()
            .filter(|&q| ctx.waiting_count(q) > 0)
            .max_by_key(|&q| (ctx.waiting_count(q), std::cmp::Reverse(q)));
        match longest {
            Some(q) => PolicyAction::SwitchTo(q),
            None => PolicyAction::IdleUntilNextEvent,
        }
    }
}

/// The queue [`LongestQueue`] would pick among `counts` (index 0 is queue 1).
pub fn longest_queue(counts: &[usize]) -> Option<QueueId> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
        .map(|(i, _)| QueueId(i + 1))
}
