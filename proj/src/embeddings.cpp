#include "mmpm/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "mmpm/errors.hpp"

namespace mmpm {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) fields.emplace_back(line, start, i - start);
    }
    return fields;
}

bool is_integer(const std::string& s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

double parse_value(const std::string& field, std::size_t line_no, const std::string& word) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + field.size())
        throw DataError("embeddings line " + std::to_string(line_no) + " word '" + word +
                        "': bad value '" + field + "'");
    return v;
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path, EmbeddingLoadReport* report) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embeddings '" + path.string() + "'");

    EmbeddingTable table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t declared_count = 0;
    bool have_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> fields = split_ws(line);
        if (fields.empty()) continue;

        if (line_no == 1 && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
            declared_count = static_cast<std::size_t>(std::strtoull(fields[0].c_str(), nullptr, 10));
            table.dim = static_cast<int>(std::strtoul(fields[1].c_str(), nullptr, 10));
            if (table.dim <= 0)
                throw DataError("embeddings '" + path.string() + "': header declares dim 0");
            have_header = true;
            continue;
        }

        const std::string& word = fields[0];
        const int values = static_cast<int>(fields.size()) - 1;
        if (table.dim == 0) {
            if (values == 0)
                throw DataError("embeddings line " + std::to_string(line_no) + " word '" + word +
                                "': no values");
            table.dim = values;
        }
        if (values != table.dim)
            throw DataError("embeddings line " + std::to_string(line_no) + " word '" + word +
                            "': expected " + std::to_string(table.dim) + " values, got " +
                            std::to_string(values));

        Eigen::VectorXd vec(table.dim);
        bool all_zero = true;
        for (int i = 0; i < table.dim; ++i) {
            const double v = parse_value(fields[static_cast<std::size_t>(i) + 1], line_no, word);
            if (!std::isfinite(v))
                throw DataError("embeddings line " + std::to_string(line_no) + " word '" + word +
                                "': non-finite value");
            if (v != 0.0) all_zero = false;
            vec[i] = v;
        }
        if (all_zero)
            throw DataError("embeddings line " + std::to_string(line_no) + " word '" + word +
                            "': all-zero vector");

        auto [it, inserted] = table.entries.insert_or_assign(word, std::move(vec));
        (void)it;
        if (!inserted && report)
            report->warnings.push_back("embeddings line " + std::to_string(line_no) +
                                       ": duplicate word '" + word + "', last entry wins");
    }

    if (have_header && declared_count != table.entries.size() && report)
        report->warnings.push_back("embeddings '" + path.string() + "': header declares " +
                                   std::to_string(declared_count) + " words, file has " +
                                   std::to_string(table.entries.size()));
    return table;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write embeddings '" + path.string() + "'");
    out << table.entries.size() << ' ' << table.dim << '\n';

    std::vector<std::string> words;
    words.reserve(table.entries.size());
    for (const auto& [word, vec] : table.entries) words.push_back(word);
    std::sort(words.begin(), words.end());

    char buf[64];
    for (const std::string& word : words) {
        out << word;
        const Eigen::VectorXd& vec = table.entries.at(word);
        for (int i = 0; i < vec.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", vec[i]);
            out << ' ' << buf;
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing embeddings '" + path.string() + "'");
}

}  // namespace mmpm
