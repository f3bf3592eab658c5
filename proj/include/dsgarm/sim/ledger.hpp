#pragma once

#include <cstdint>
#include <vector>

namespace dsgarm::sim {

/// Reservations a node knows about, keyed by absolute period (ABS) or
/// virtual-slot (RAN) index. Backed by a ring: every live index must lie
/// within `horizon` of the indices queried alongside it.
class PeriodLedger {
public:
    explicit PeriodLedger(std::size_t horizon = 4096);

    void reserve(std::int64_t index, int holder);
    void release(std::int64_t index);
    bool reserved(std::int64_t index) const;
    /// -1 when free.
    int holder(std::int64_t index) const;

    /// The first `count` unreserved indices >= first.
    std::vector<std::int64_t> idle_from(std::int64_t first, int count) const;
    /// The (rank+1)-th unreserved index >= first.
    std::int64_t nth_idle(std::int64_t first, int rank) const;

    std::size_t horizon() const { return index_.size(); }
    bool operator==(const PeriodLedger&) const = default;

private:
    std::size_t slot(std::int64_t index) const { return static_cast<std::size_t>(index) % index_.size(); }
    std::vector<std::int64_t> index_;
    std::vector<int> holder_;
};

}  // namespace dsgarm::sim
