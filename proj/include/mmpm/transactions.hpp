#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmpm/corpus.hpp"
#include "mmpm/text.hpp"
#include "mmpm/visual.hpp"

namespace mmpm {

enum class Modality { visual, text, event };

// Partition of the integer item universe: filters take [0,F), word clusters
// [F,F+K), events [F+K,F+K+E).
struct ItemSpace {
    int visual_count = 0;  // F
    int text_count = 0;    // K
    int event_count = 0;   // E

    int size() const { return visual_count + text_count + event_count; }
    void validate() const;

    int encode_visual(int filter) const;
    int encode_text(int cluster) const;
    int encode_event(int event) const;
    Modality modality(int item) const;
    int decode(int item) const;  // index within the item's modality

    bool operator==(const ItemSpace&) const = default;
};

struct Transaction {
    std::uint64_t tx_id = 0;
    std::string doc_id;
    PatchCell cell{0, 0};
    std::vector<int> items;  // sorted, unique, in [0, space.size())
};

// One transaction per surviving patch cell; text and event items replicate
// across the document's patches. A document without events yields nothing.
std::vector<Transaction> fuse(const Document& doc, const std::vector<VisualItemset>& visual,
                              const TextItemset& text, const ItemSpace& space,
                              std::uint64_t first_tx_id);

struct TransactionStore {
    ItemSpace space;
    std::vector<Transaction> transactions;

    std::size_t size() const { return transactions.size(); }
    bool empty() const { return transactions.empty(); }
};

// Binary layout: magic "MMTX", u32 version, u32 F, u32 K, u32 E, u64 doc
// count, u64 transaction count; doc table of length-prefixed doc ids; then
// per transaction u64 tx_id, u32 doc index, u32 row, u32 col, u32 item
// count, and the sorted u32 items. All integers little-endian.
void save_transactions(const std::filesystem::path& path, const TransactionStore& store);
TransactionStore load_transactions(const std::filesystem::path& path);

}  // namespace mmpm
