#include "mmpm/transactions.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "mmpm/errors.hpp"

namespace mmpm {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'T', 'X'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t read_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64le(std::istream& in) {
    const std::uint64_t lo = read_u32le(in);
    const std::uint64_t hi = read_u32le(in);
    return lo | (hi << 32);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64le(std::ostream& out, std::uint64_t v) {
    write_u32le(out, static_cast<std::uint32_t>(v & 0xffffffffu));
    write_u32le(out, static_cast<std::uint32_t>(v >> 32));
}

}  // namespace

void ItemSpace::validate() const {
    if (visual_count < 1 || text_count < 1 || event_count < 1)
        throw ConfigError("item space needs at least one filter, one cluster, and one event; got " +
                          std::to_string(visual_count) + "/" + std::to_string(text_count) + "/" +
                          std::to_string(event_count));
}

int ItemSpace::encode_visual(int filter) const {
    if (filter < 0 || filter >= visual_count)
        throw DataError("filter id " + std::to_string(filter) + " outside [0," +
                        std::to_string(visual_count) + ")");
    return filter;
}

int ItemSpace::encode_text(int cluster) const {
    if (cluster < 0 || cluster >= text_count)
        throw DataError("cluster id " + std::to_string(cluster) + " outside [0," +
                        std::to_string(text_count) + ")");
    return visual_count + cluster;
}

int ItemSpace::encode_event(int event) const {
    if (event < 0 || event >= event_count)
        throw DataError("event id " + std::to_string(event) + " outside [0," +
                        std::to_string(event_count) + ")");
    return visual_count + text_count + event;
}

Modality ItemSpace::modality(int item) const {
    if (item < 0 || item >= size())
        throw DataError("item id " + std::to_string(item) + " outside [0," +
                        std::to_string(size()) + ")");
    if (item < visual_count) return Modality::visual;
    if (item < visual_count + text_count) return Modality::text;
    return Modality::event;
}

int ItemSpace::decode(int item) const {
    switch (modality(item)) {
        case Modality::visual: return item;
        case Modality::text: return item - visual_count;
        case Modality::event: return item - visual_count - text_count;
    }
    return -1;  // unreachable
}

std::vector<Transaction> fuse(const Document& doc, const std::vector<VisualItemset>& visual,
                              const TextItemset& text, const ItemSpace& space,
                              std::uint64_t first_tx_id) {
    std::vector<Transaction> out;
    if (doc.events.empty()) return out;

    std::vector<int> shared;
    for (int c : text.items) shared.push_back(space.encode_text(c));
    for (int e : doc.events) shared.push_back(space.encode_event(e));

    out.reserve(visual.size());
    for (const VisualItemset& vi : visual) {
        Transaction tx;
        tx.tx_id = first_tx_id + out.size();
        tx.doc_id = doc.doc_id;
        tx.cell = vi.cell;
        tx.items.reserve(vi.items.size() + shared.size());
        for (int f : vi.items) tx.items.push_back(space.encode_visual(f));
        tx.items.insert(tx.items.end(), shared.begin(), shared.end());
        std::sort(tx.items.begin(), tx.items.end());
        out.push_back(std::move(tx));
    }
    return out;
}

void save_transactions(const std::filesystem::path& path, const TransactionStore& store) {
    store.space.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write transactions '" + path.string() + "'");

    std::vector<std::string> doc_table;
    std::unordered_map<std::string, std::uint32_t> doc_index;
    for (const Transaction& tx : store.transactions) {
        if (doc_index.emplace(tx.doc_id, doc_table.size()).second) doc_table.push_back(tx.doc_id);
    }

    out.write(kMagic, 4);
    write_u32le(out, kVersion);
    write_u32le(out, static_cast<std::uint32_t>(store.space.visual_count));
    write_u32le(out, static_cast<std::uint32_t>(store.space.text_count));
    write_u32le(out, static_cast<std::uint32_t>(store.space.event_count));
    write_u64le(out, doc_table.size());
    write_u64le(out, store.transactions.size());
    for (const std::string& id : doc_table) {
        write_u32le(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    for (const Transaction& tx : store.transactions) {
        write_u64le(out, tx.tx_id);
        write_u32le(out, doc_index.at(tx.doc_id));
        write_u32le(out, static_cast<std::uint32_t>(tx.cell.row));
        write_u32le(out, static_cast<std::uint32_t>(tx.cell.col));
        write_u32le(out, static_cast<std::uint32_t>(tx.items.size()));
        for (int item : tx.items) write_u32le(out, static_cast<std::uint32_t>(item));
    }
    if (!out) throw DataError("failed writing transactions '" + path.string() + "'");
}

TransactionStore load_transactions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open transactions '" + path.string() + "'");

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("transactions '" + path.string() + "': bad magic (expected MMTX)");
    const std::uint32_t version = read_u32le(in);
    if (version != kVersion)
        throw DataError("transactions '" + path.string() + "': unsupported version " +
                        std::to_string(version));

    TransactionStore store;
    store.space.visual_count = static_cast<int>(read_u32le(in));
    store.space.text_count = static_cast<int>(read_u32le(in));
    store.space.event_count = static_cast<int>(read_u32le(in));
    const std::uint64_t doc_count = read_u64le(in);
    const std::uint64_t tx_count = read_u64le(in);
    if (!in) throw DataError("transactions '" + path.string() + "': truncated header");
    store.space.validate();

    std::vector<std::string> doc_table(doc_count);
    for (std::uint64_t i = 0; i < doc_count; ++i) {
        const std::uint32_t len = read_u32le(in);
        if (!in || len > (1u << 20))
            throw DataError("transactions '" + path.string() + "': bad doc id length");
        doc_table[i].resize(len);
        in.read(doc_table[i].data(), len);
    }

    const int universe = store.space.size();
    store.transactions.resize(tx_count);
    for (std::uint64_t i = 0; i < tx_count; ++i) {
        Transaction& tx = store.transactions[i];
        tx.tx_id = read_u64le(in);
        const std::uint32_t doc = read_u32le(in);
        tx.cell.row = static_cast<int>(read_u32le(in));
        tx.cell.col = static_cast<int>(read_u32le(in));
        const std::uint32_t n_items = read_u32le(in);
        if (!in || doc >= doc_count)
            throw DataError("transactions '" + path.string() + "': record " + std::to_string(i) +
                            " is truncated or references a missing document");
        tx.doc_id = doc_table[doc];
        tx.items.resize(n_items);
        for (std::uint32_t j = 0; j < n_items; ++j)
            tx.items[j] = static_cast<int>(read_u32le(in));
        if (!in)
            throw DataError("transactions '" + path.string() + "': truncated record " +
                            std::to_string(i));
        int prev = -1;
        for (int item : tx.items) {
            if (item <= prev || item >= universe)
                throw DataError("transactions '" + path.string() + "': record " +
                                std::to_string(i) + " items must be strictly increasing and < " +
                                std::to_string(universe));
            prev = item;
        }
    }
    in.peek();
    if (!in.eof()) throw DataError("transactions '" + path.string() + "': trailing bytes");
    return store;
}

}  // namespace mmpm
