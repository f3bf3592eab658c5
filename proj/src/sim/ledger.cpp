#include "dsgarm/sim/ledger.hpp"

#include <stdexcept>

namespace dsgarm::sim {

PeriodLedger::PeriodLedger(std::size_t horizon) : index_(horizon, -1), holder_(horizon, -1) {
    if (horizon == 0) throw std::invalid_argument("PeriodLedger: horizon must be positive");
}

void PeriodLedger::reserve(std::int64_t index, int holder) {
    if (index < 0) throw std::invalid_argument("PeriodLedger: negative index");
    index_[slot(index)] = index;
    holder_[slot(index)] = holder;
}

void PeriodLedger::release(std::int64_t index) {
    if (index < 0 || index_[slot(index)] != index) return;
    index_[slot(index)] = -1;
    holder_[slot(index)] = -1;
}

bool PeriodLedger::reserved(std::int64_t index) const { return index >= 0 && index_[slot(index)] == index; }

int PeriodLedger::holder(std::int64_t index) const { return reserved(index) ? holder_[slot(index)] : -1; }

std::vector<std::int64_t> PeriodLedger::idle_from(std::int64_t first, int count) const {
    std::vector<std::int64_t> out;
    out.reserve(count > 0 ? count : 0);
    for (std::int64_t i = first; static_cast<int>(out.size()) < count; ++i)
        if (!reserved(i)) out.push_back(i);
    return out;
}

std::int64_t PeriodLedger::nth_idle(std::int64_t first, int rank) const {
    for (std::int64_t i = first;; ++i)
        if (!reserved(i) && rank-- == 0) return i;
}

}  // namespace dsgarm::sim
