#include "tideh/cascade_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tideh/error.hpp"
#include "tideh/text_format.hpp"

namespace tideh {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

[[noreturn]] void bad_row(const std::string& id, std::size_t line_no, const std::string& why) {
    throw Error(ErrorCode::parse,
                "cascade '" + id + "' line " + std::to_string(line_no) + ": " + why);
}

} // namespace

Cascade parse_cascade(std::istream& in, const std::string& id, std::vector<std::string>* warnings) {
    std::vector<Event> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != 2) bad_row(id, line_no, "expected 2 columns");
        Event e;
        if (!parse_number(fields[0], e.time) || !std::isfinite(e.time))
            bad_row(id, line_no, "time is not a number");
        if (e.time < 0.0) bad_row(id, line_no, "negative time");
        if (!parse_number(fields[1], e.followers))
            bad_row(id, line_no, "follower count is not an integer");
        if (e.followers < 0) bad_row(id, line_no, "negative follower count");
        events.push_back(e);
    }
    if (events.empty()) throw Error(ErrorCode::missing_origin, "cascade '" + id + "' is empty");
    const auto by_time = [](const Event& a, const Event& b) { return a.time < b.time; };
    if (!std::is_sorted(events.begin(), events.end(), by_time)) {
        std::stable_sort(events.begin(), events.end(), by_time);
        if (warnings) warnings->push_back("cascade '" + id + "': rows were not in time order; sorted");
    }
    if (events.front().time != 0.0)
        throw Error(ErrorCode::missing_origin,
                    "cascade '" + id + "' has no origin row at offset 0");
    return Cascade(id, std::move(events));
}

void write_cascade(std::ostream& out, const Cascade& c) {
    for (const Event& e : c.events()) out << format_double(e.time) << ' ' << e.followers << '\n';
}

Cascade load_cascade(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open cascade file " + path.string());
    return parse_cascade(in, path.stem().string(), warnings);
}

void save_cascade(const Cascade& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write cascade file " + path.string());
    write_cascade(out, c);
}

std::vector<Cascade> load_corpus(const std::filesystem::path& dir,
                                 std::vector<std::string>* warnings) {
    std::ifstream index(dir / kCorpusIndex);
    if (!index) throw Error(ErrorCode::io, "cannot open corpus index " + (dir / kCorpusIndex).string());
    std::vector<Cascade> out;
    std::string id;
    while (std::getline(index, id)) {
        const auto fields = split_ws(id);
        if (fields.empty()) continue;
        out.push_back(load_cascade(dir / (std::string(fields[0]) + ".txt"), warnings));
    }
    return out;
}

void save_corpus(const std::vector<Cascade>& cascades, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream index(dir / kCorpusIndex);
    if (!index) throw Error(ErrorCode::io, "cannot write corpus index in " + dir.string());
    for (const auto& c : cascades) {
        if (c.id().empty() || c.id() == "index" || c.id().find('/') != std::string::npos)
            throw Error(ErrorCode::invalid_argument,
                        "cascade id '" + c.id() + "' cannot be used as a corpus file name");
        save_cascade(c, dir / (c.id() + ".txt"));
        index << c.id() << '\n';
    }
}

} // namespace tideh
