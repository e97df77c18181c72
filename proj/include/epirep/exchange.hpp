#pragma once

// Session admission and per-tick session progress over relay paths.

#include <cstdint>
#include <optional>

#include "epirep/world.hpp"

namespace epirep {

struct ExchangeOutcome {
  bool initiated = false;
  /// Requester already holds or awaits the chunk; nothing was attempted.
  bool skipped = false;
  FailureReason reason = FailureReason::None;  // why admission was refused
  SessionId session = 0;
};

/// Admission for one chunk request: index lookup, routing (intercluster
/// transfers without a direct link pass both cluster heads), delay bound,
/// k_valid gate for intracluster transfers, and requester capacity. An
/// admitted session is stored in world.sessions and advanced once at `now`.
/// `source` bypasses the index lookup.
ExchangeOutcome run_chunk_exchange(World& world, NodeId requester, ChunkId chunk, Tick now,
                                   std::optional<NodeId> source = std::nullopt,
                                   std::uint64_t request = 0);

/// Advances every active session in id order; sessions that close move to
/// world.closed.
void advance_sessions(World& world, Tick now);

/// Active session by id, or nullptr.
const TransferSession* find_session(const World& world, SessionId id);

}  // namespace epirep
