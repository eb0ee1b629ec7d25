#include "spinmix/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <variant>

#include "spinmix/ground_states.hpp"

namespace spinmix {

//---------------------------------------------------------------------------//
// Numbers
//---------------------------------------------------------------------------//

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text)
{
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    double value = 0.0;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    return value;
}

//---------------------------------------------------------------------------//
// CSV
//---------------------------------------------------------------------------//

void CsvTable::add_column(std::string name, std::vector<double> values)
{
    if (!columns.empty() && values.size() != rows()) {
        throw std::invalid_argument("column '" + name + "' has a different length");
    }
    header.push_back(std::move(name));
    columns.push_back(std::move(values));
}

const std::vector<double>& CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("no column named '" + name + "'");
    return columns[static_cast<std::size_t>(it - header.begin())];
}

void write_csv(std::ostream& out, const CsvTable& table)
{
    for (const auto& line : table.metadata) out << "# " << line << '\n';
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        out << (c ? "," : "") << table.header[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            out << (c ? "," : "") << format_double(table.columns[c][r]);
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

CsvTable read_csv(std::istream& in)
{
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            table.metadata.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1));
            continue;
        }
        auto fields = split_fields(line);
        if (!have_header) {
            table.header = fields;
            table.columns.assign(fields.size(), {});
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(table.header.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) table.columns[c].push_back(parse_double(fields[c]));
    }
    if (!have_header) throw std::invalid_argument("CSV input has no header row");
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_csv(out, table);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_csv(in);
}

Json summarize(const CsvTable& table)
{
    Json out = Json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        const auto& v = table.columns[c];
        Json s;
        s["count"] = v.size();
        if (!v.empty()) {
            double sum = 0.0;
            for (double x : v) sum += x;
            s["sum"] = sum;
            s["mean"] = sum / static_cast<double>(v.size());
            s["min"] = *std::min_element(v.begin(), v.end());
            s["max"] = *std::max_element(v.begin(), v.end());
            s["first"] = v.front();
            s["last"] = v.back();
        }
        out[table.header[c]] = std::move(s);
    }
    return out;
}

void write_json(const std::filesystem::path& path, const Json& value)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << value.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return Json::parse(in);
}

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

namespace {

using FieldRef = std::variant<int*, double*, std::uint64_t*, std::string*>;

std::vector<std::pair<std::string, FieldRef>> fields_of(RunConfig& c)
{
    return {
        {"N", &c.N},
        {"M", &c.M},
        {"sigma", &c.sigma},
        {"q_prime", &c.q_prime},
        {"xi", &c.xi},
        {"dt", &c.dt},
        {"t_final", &c.t_final},
        {"runs", &c.runs},
        {"seed", &c.seed},
        {"trajectory", &c.trajectory},
        {"initial_state", &c.initial_state},
        {"record_stride", &c.record_stride},
        {"bin_width", &c.bin_width},
        {"workers", &c.workers},
        {"scheme", &c.scheme},
        {"t_hold", &c.t_hold},
        {"late_fraction", &c.late_fraction},
        {"output", &c.output},
        {"manifest", &c.manifest},
        {"input", &c.input},
        {"column", &c.column},
        {"window", &c.window},
        {"smooth_window", &c.smooth_window},
        {"smooth_cutoff", &c.smooth_cutoff},
        {"level", &c.level},
        {"noise", &c.noise},
        {"kappa_hz", &c.kappa_hz},
        {"g0_hz", &c.g0_hz},
        {"lambda_hz", &c.lambda_hz},
        {"eta_hz", &c.eta_hz},
        {"delta_pa_hz", &c.delta_pa_hz},
        {"q_hz", &c.q_hz},
    };
}

FieldRef find_field(RunConfig& c, const std::string& key)
{
    for (auto& [name, ref] : fields_of(c)) {
        if (name == key) return ref;
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

template <class T>
T integer_from_text(const std::string& key, const std::string& text)
{
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    T value{};
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + text + "'");
    }
    return value;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys()
{
    static const std::vector<std::string> names = [] {
        RunConfig c;
        std::vector<std::string> out;
        for (auto& [name, ref] : fields_of(c)) out.push_back(name);
        return out;
    }();
    return names;
}

void RunConfig::apply(const Json& object)
{
    if (!object.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [key, value] : object.items()) {
        const FieldRef ref = find_field(*this, key);
        std::visit(
            [&, &key = key, &value = value](auto* field) {
                using T = std::remove_pointer_t<decltype(field)>;
                if constexpr (std::is_same_v<T, std::string>) {
                    if (!value.is_string()) throw ConfigError("key '" + key + "' expects a string");
                    *field = value.template get<std::string>();
                } else if constexpr (std::is_same_v<T, double>) {
                    if (!value.is_number()) throw ConfigError("key '" + key + "' expects a number");
                    *field = value.template get<double>();
                } else if constexpr (std::is_same_v<T, int>) {
                    if (!value.is_number_integer()) throw ConfigError("key '" + key + "' expects an integer");
                    const auto v = value.template get<std::int64_t>();
                    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
                        throw ConfigError("key '" + key + "' is out of range");
                    }
                    *field = static_cast<int>(v);
                } else {
                    if (!value.is_number_unsigned()) {
                        throw ConfigError("key '" + key + "' expects a nonnegative integer");
                    }
                    *field = value.template get<T>();
                }
            },
            ref);
    }
}

void RunConfig::apply(const std::string& key, const std::string& text)
{
    const FieldRef ref = find_field(*this, key);
    std::visit(
        [&](auto* field) {
            using T = std::remove_pointer_t<decltype(field)>;
            if constexpr (std::is_same_v<T, std::string>) {
                *field = text;
            } else if constexpr (std::is_same_v<T, double>) {
                try {
                    *field = parse_double(text);
                } catch (const std::invalid_argument&) {
                    throw ConfigError("key '" + key + "' expects a number, got '" + text + "'");
                }
            } else {
                *field = integer_from_text<T>(key, text);
            }
        },
        ref);
}

Json RunConfig::to_json() const
{
    Json out = Json::object();
    RunConfig copy = *this;
    for (auto& [name, ref] : fields_of(copy)) {
        std::visit([&, &name = name](auto* field) { out[name] = *field; }, ref);
    }
    return out;
}

DriftScheme RunConfig::drift_scheme() const
{
    if (scheme == "rk4") return DriftScheme::rk4;
    if (scheme == "split_exact") return DriftScheme::split_exact;
    throw ConfigError("scheme must be rk4 or split_exact, got '" + scheme + "'");
}

IntegratorConfig RunConfig::integrator() const
{
    IntegratorConfig c;
    c.dt = dt;
    c.t_final = t_final;
    c.xi = xi;
    c.record_stride = record_stride;
    c.scheme = drift_scheme();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    Json j;
    try {
        j = read_json(path);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    RunConfig c;
    c.apply(j);
    return c;
}

StateVector make_initial_state(const std::string& spec, const BasisPtr& basis)
{
    const int n = basis->n_total();
    const int m = basis->magnetization();
    if (spec == "afm_ground") {
        if (m != 0) throw ConfigError("afm_ground lives in the M = 0 sector");
        if (n % 2 != 0) throw ConfigError("afm_ground requires even N");
        return afm_ground_state(n);
    }
    if (spec == "fm_ground_m0") {
        if (m != 0) throw ConfigError("fm_ground_m0 lives in the M = 0 sector");
        return fm_ground_manifold(n, 0);
    }
    if (spec == "all_zero_component") {
        const auto idx = basis->index_of({0, n, 0});
        if (!idx) throw ConfigError("|0,N,0> lives in the M = 0 sector");
        return StateVector::fock(basis, *idx);
    }
    if (spec.rfind("fock:", 0) == 0) {
        const auto k = integer_from_text<std::size_t>("initial_state", spec.substr(5));
        if (k >= basis->dimension()) {
            throw ConfigError("fock index " + std::to_string(k) + " outside the sector of dimension " +
                              std::to_string(basis->dimension()));
        }
        return StateVector::fock(basis, k);
    }
    throw ConfigError("unknown initial_state '" + spec + "'");
}

}  // namespace spinmix
