#include "vrpagent/instances/instance_file.hpp"

#include "vrpagent/util/digest.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace vrpagent {

namespace {

constexpr std::string_view kMagic = "vrpagent-instance";
constexpr std::string_view kFields = "fields id x y demand tw_start tw_end service prize";

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
            ++i;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') {
            ++j;
        }
        if (j > i) {
            out.push_back(line.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

template <class T>
T parse_number(std::string_view token, int line, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw InstanceFormatError(std::string("malformed ") + what + " '" + std::string(token) + "'", line);
    }
    return value;
}

struct LineReader {
    std::string_view text;
    std::size_t pos = 0;
    int line_no = 0;

    bool next(std::string_view& line, std::size_t& start) {
        if (pos >= text.size()) {
            return false;
        }
        start = pos;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            line = text.substr(pos);
            pos = text.size();
        } else {
            line = text.substr(pos, end - pos);
            pos = end + 1;
        }
        ++line_no;
        return true;
    }
};

std::vector<std::string_view> expect(LineReader& reader, std::string_view key, std::size_t arity) {
    std::string_view line;
    std::size_t start = 0;
    if (!reader.next(line, start)) {
        throw InstanceFormatError("unexpected end of file, expected '" + std::string(key) + "'", reader.line_no + 1);
    }
    auto tokens = split_ws(line);
    if (tokens.size() != arity + 1 || tokens[0] != key) {
        throw InstanceFormatError("malformed row, expected '" + std::string(key) + "' with " +
                                      std::to_string(arity) + " value(s)",
                                  reader.line_no);
    }
    return tokens;
}

} // namespace

std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw std::runtime_error("cannot format real");
    }
    return {buf, ptr};
}

std::string serialize_instance(const Instance& instance) {
    std::ostringstream out;
    std::string name = instance.name().empty() ? "unnamed" : instance.name();
    for (char& c : name) {
        if (c == ' ' || c == '\t' || c == '\n') {
            c = '_';
        }
    }
    out << kMagic << ' ' << kInstanceFormatVersion << '\n';
    out << "name " << name << '\n';
    out << "problem " << to_string(instance.kind()) << '\n';
    out << "customers " << instance.num_customers() << '\n';
    out << "capacity " << instance.capacity() << '\n';
    out << kFields << '\n';
    for (int i = 0; i < instance.num_nodes(); ++i) {
        const NodeData& n = instance.node(i);
        out << "node " << i << ' ' << format_real(n.x) << ' ' << format_real(n.y) << ' ' << n.demand << ' '
            << format_real(n.tw_start) << ' ' << format_real(n.tw_end) << ' ' << format_real(n.service_time) << ' '
            << format_real(n.prize) << '\n';
    }
    std::string body = out.str();
    return body + "checksum sha256 " + sha256_hex(body) + "\n";
}

Instance parse_instance(const std::string& text) {
    LineReader reader{text};
    auto magic = expect(reader, kMagic, 1);
    int version = parse_number<int>(magic[1], reader.line_no, "version");
    if (version != kInstanceFormatVersion) {
        throw InstanceFormatError("unsupported format version " + std::to_string(version), reader.line_no);
    }
    std::string name(expect(reader, "name", 1)[1]);
    auto problem_tok = expect(reader, "problem", 1);
    ProblemKind kind;
    try {
        kind = parse_problem_kind(problem_tok[1]);
    } catch (const std::invalid_argument& e) {
        throw InstanceFormatError(e.what(), reader.line_no);
    }
    int customers = parse_number<int>(expect(reader, "customers", 1)[1], reader.line_no, "customer count");
    if (customers < 0) {
        throw InstanceFormatError("negative customer count", reader.line_no);
    }
    int capacity = parse_number<int>(expect(reader, "capacity", 1)[1], reader.line_no, "capacity");
    {
        std::string_view line;
        std::size_t start = 0;
        if (!reader.next(line, start) || line != kFields) {
            throw InstanceFormatError("malformed row, expected field header", reader.line_no);
        }
    }
    std::vector<NodeData> nodes(static_cast<std::size_t>(customers) + 1);
    for (int i = 0; i <= customers; ++i) {
        auto tok = expect(reader, "node", 8);
        int line = reader.line_no;
        if (parse_number<int>(tok[1], line, "node id") != i) {
            throw InstanceFormatError("node ids must be consecutive from 0", line);
        }
        NodeData& n = nodes[static_cast<std::size_t>(i)];
        n.x = parse_number<double>(tok[2], line, "x");
        n.y = parse_number<double>(tok[3], line, "y");
        n.demand = parse_number<int>(tok[4], line, "demand");
        n.tw_start = parse_number<double>(tok[5], line, "tw_start");
        n.tw_end = parse_number<double>(tok[6], line, "tw_end");
        n.service_time = parse_number<double>(tok[7], line, "service");
        n.prize = parse_number<double>(tok[8], line, "prize");
    }
    std::size_t body_end = reader.pos;
    auto checksum = expect(reader, "checksum", 2);
    if (checksum[1] != "sha256") {
        throw InstanceFormatError("unsupported checksum algorithm", reader.line_no);
    }
    if (sha256_hex(std::string_view(text).substr(0, body_end)) != checksum[2]) {
        throw InstanceFormatError("checksum mismatch", reader.line_no);
    }
    try {
        return Instance(kind, capacity, std::move(nodes), std::move(name));
    } catch (const InstanceError& e) {
        throw InstanceFormatError(e.what(), 0);
    }
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << serialize_instance(instance);
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_instance(text);
}

} // namespace vrpagent
