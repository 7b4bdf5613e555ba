#include "roughstokes/config.hpp"

#include "roughstokes/expression.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace roughstokes {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

int parse_int(std::string_view key, std::string_view text)
{
    int value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(text) + "'");
    }
    return value;
}

double parse_double(std::string_view key, std::string_view text)
{
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(text) + "'");
    }
    return value;
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class Parse>
auto parse_enum(std::string_view key, std::string_view text, Parse parse)
{
    try {
        return parse(text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("'" + std::string(key) + "': " + e.what());
    }
}

bool is_builtin_datum(std::string_view name)
{
    return name == "cavity" || name == "linear" || name == "parabolic-normal";
}

std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.emplace_back(trim(text.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

DatumPiece parse_piece(const std::string& text, const std::vector<Segment>& segments)
{
    const auto parts = split(text, ';');
    if (parts.size() != 3) {
        throw ConfigError("piece '" + text + "' must read 'segment begin end ; gx ; gy'");
    }
    std::istringstream head(parts[0]);
    DatumPiece piece;
    if (!(head >> piece.segment >> piece.begin >> piece.end) || !(head >> std::ws).eof()) {
        throw ConfigError("piece '" + text + "': bad 'segment begin end' prefix");
    }
    if (piece.segment < 0 || piece.segment >= static_cast<int>(segments.size())) {
        throw ConfigError("piece '" + text + "': no segment " + std::to_string(piece.segment));
    }
    try {
        const Expression gx(parts[1]);
        const Expression gy(parts[2]);
        const Segment seg = segments[piece.segment];
        piece.f = [gx, gy, seg](const Vec2& p) {
            const double t = seg.parameter(p);
            return Vec2(gx(p.x(), p.y(), t), gy(p.x(), p.y(), t));
        };
    } catch (const ExpressionError& e) {
        throw ConfigError("piece '" + text + "': " + e.what());
    }
    return piece;
}

std::vector<std::string> read_piece_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("datum '" + path + "' is neither a built-in name nor a readable file");
    }
    std::vector<std::string> pieces;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos || trim(body.substr(0, eq)) != "piece") {
            throw ConfigError(path + ":" + std::to_string(number) + ": expected 'piece = ...'");
        }
        pieces.emplace_back(trim(body.substr(eq + 1)));
    }
    return pieces;
}

void check_writable_dir(const fs::path& dir, const std::string& what)
{
    std::error_code ec;
    const fs::path target = dir.empty() ? fs::path(".") : dir;
    if (!fs::is_directory(target, ec)) {
        throw ConfigError(what + ": directory '" + target.string() + "' does not exist");
    }
    const fs::path probe = target / ".roughstokes-write-probe";
    {
        std::ofstream out(probe);
        if (!out) {
            throw ConfigError(what + ": directory '" + target.string() + "' is not writable");
        }
    }
    fs::remove(probe, ec);
}

}  // namespace

std::string_view to_string(RefinementMode mode)
{
    return mode == RefinementMode::Adaptive ? "adaptive" : "uniform";
}

RefinementMode parse_mode(std::string_view name)
{
    if (name == "uniform") {
        return RefinementMode::Uniform;
    }
    if (name == "adaptive") {
        return RefinementMode::Adaptive;
    }
    throw std::invalid_argument("unknown refinement mode '" + std::string(name) + "'");
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys{
        "datum",  "piece", "regularizer", "jump_policy", "method",    "mode",      "estimator_edges", "theta",
        "n",      "mesh_file", "levels",  "max_dofs",    "max_iters", "csv",       "vtk_dir"};
    return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view raw)
{
    const std::string_view value = trim(raw);
    if (key == "datum") {
        config.datum = value;
    } else if (key == "piece") {
        config.pieces.emplace_back(value);
    } else if (key == "regularizer") {
        config.regularizer = parse_enum(key, value, parse_regularizer);
    } else if (key == "jump_policy") {
        config.jump_policy = parse_enum(key, value, parse_jump_policy);
    } else if (key == "method") {
        config.method = parse_enum(key, value, parse_method);
    } else if (key == "mode") {
        config.mode = parse_enum(key, value, parse_mode);
    } else if (key == "estimator_edges") {
        config.estimator_edges = parse_enum(key, value, parse_estimator_edges);
    } else if (key == "theta") {
        config.theta = parse_double(key, value);
    } else if (key == "n") {
        config.n = parse_int(key, value);
    } else if (key == "mesh_file") {
        config.mesh_file = value;
    } else if (key == "levels") {
        config.levels = parse_int(key, value);
    } else if (key == "max_dofs") {
        config.max_dofs = parse_int(key, value);
    } else if (key == "max_iters") {
        config.max_iters = parse_int(key, value);
    } else if (key == "csv") {
        config.csv = value;
    } else if (key == "vtk_dir") {
        config.vtk_dir = value;
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
    }
}

RunConfig parse_config(std::istream& in)
{
    RunConfig config;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        }
        try {
            apply_setting(config, trim(body.substr(0, eq)), body.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    return config;
}

RunConfig parse_config(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_config(in);
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    return parse_config(in);
}

std::string serialize(const RunConfig& c)
{
    std::ostringstream out;
    out << "datum = " << c.datum << '\n';
    for (const std::string& p : c.pieces) {
        out << "piece = " << p << '\n';
    }
    out << "regularizer = " << to_string(c.regularizer) << '\n';
    out << "jump_policy = " << to_string(c.jump_policy) << '\n';
    out << "method = " << to_string(c.method) << '\n';
    out << "mode = " << to_string(c.mode) << '\n';
    out << "estimator_edges = " << to_string(c.estimator_edges) << '\n';
    if (c.theta) {
        out << "theta = " << format_double(*c.theta) << '\n';
    }
    if (c.n) {
        out << "n = " << *c.n << '\n';
    }
    if (!c.mesh_file.empty()) {
        out << "mesh_file = " << c.mesh_file << '\n';
    }
    out << "levels = " << c.levels << '\n';
    out << "max_dofs = " << c.max_dofs << '\n';
    out << "max_iters = " << c.max_iters << '\n';
    if (!c.csv.empty()) {
        out << "csv = " << c.csv << '\n';
    }
    if (!c.vtk_dir.empty()) {
        out << "vtk_dir = " << c.vtk_dir << '\n';
    }
    return out.str();
}

void validate(const RunConfig& c)
{
    if (c.mode == RefinementMode::Adaptive && !c.theta) {
        throw ConfigError("adaptive mode requires theta");
    }
    if (c.mode == RefinementMode::Uniform && c.theta) {
        throw ConfigError("theta applies to adaptive mode only");
    }
    if (c.theta && !(*c.theta > 0.0 && *c.theta < 1.0)) {
        throw ConfigError("theta must lie in (0, 1)");
    }
    if (c.n && !c.mesh_file.empty()) {
        throw ConfigError("give either n or mesh_file, not both");
    }
    if (c.n && *c.n < 1) {
        throw ConfigError("n must be positive");
    }
    if (c.levels < 1) {
        throw ConfigError("levels must be positive");
    }
    if (c.max_dofs < 1) {
        throw ConfigError("max_dofs must be positive");
    }
    if (c.max_iters < 0) {
        throw ConfigError("max_iters must be nonnegative");
    }
    if (c.datum.empty()) {
        throw ConfigError("datum is empty");
    }
    if (c.datum == "custom" && c.pieces.empty()) {
        throw ConfigError("custom datum without piece entries");
    }
    if (c.datum != "custom" && !c.pieces.empty()) {
        throw ConfigError("piece entries require datum = custom");
    }
}

void validate_paths(const RunConfig& c)
{
    if (!c.csv.empty()) {
        const fs::path csv(c.csv);
        if (fs::is_directory(csv)) {
            throw ConfigError("csv: '" + c.csv + "' is a directory");
        }
        check_writable_dir(csv.parent_path(), "csv");
    }
    if (!c.vtk_dir.empty()) {
        std::error_code ec;
        fs::create_directories(c.vtk_dir, ec);
        if (ec) {
            throw ConfigError("vtk_dir: cannot create '" + c.vtk_dir + "': " + ec.message());
        }
        check_writable_dir(c.vtk_dir, "vtk_dir");
    }
}

int default_initial_n(const RunConfig& c)
{
    if (c.mode == RefinementMode::Adaptive) {
        return 6;
    }
    return c.method == Method::HoodTaylor ? 4 : 8;
}

MeshPtr build_initial_mesh(const RunConfig& c)
{
    if (!c.mesh_file.empty()) {
        try {
            return std::make_shared<const Mesh>(read_mesh_file(c.mesh_file));
        } catch (const MeshError& e) {
            throw ConfigError("mesh_file '" + c.mesh_file + "': " + e.what());
        }
    }
    return std::make_shared<const Mesh>(build_structured_unit_square(c.n.value_or(default_initial_n(c))));
}

BoundaryDatum build_datum(const RunConfig& c, const std::vector<Segment>& segments)
{
    if (is_builtin_datum(c.datum)) {
        BoundaryDatum datum = named_datum(c.datum, c.jump_policy);
        if (segments.size() != datum.segments().size()) {
            throw ConfigError("datum '" + c.datum + "' is defined on the unit square; the mesh has " +
                              std::to_string(segments.size()) + " boundary segments");
        }
        for (std::size_t s = 0; s < segments.size(); ++s) {
            if ((segments[s].a - datum.segments()[s].a).norm() > 1e-12 ||
                (segments[s].b - datum.segments()[s].b).norm() > 1e-12) {
                throw ConfigError("datum '" + c.datum + "': mesh segment " + std::to_string(s) +
                                  " does not match the unit square numbering");
            }
        }
        return datum;
    }
    const std::vector<std::string> texts = c.datum == "custom" ? c.pieces : read_piece_file(c.datum);
    std::vector<DatumPiece> pieces;
    pieces.reserve(texts.size());
    for (const std::string& t : texts) {
        pieces.push_back(parse_piece(t, segments));
    }
    try {
        return BoundaryDatum(segments, std::move(pieces), c.jump_policy);
    } catch (const IncompatibleDatumError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("datum: ") + e.what());
    }
}

StudyConfig make_study(const RunConfig& c)
{
    validate(c);
    StudyConfig study;
    study.initial_mesh = build_initial_mesh(c);
    study.datum = build_datum(c, study.initial_mesh->segments());
    study.regularizer = c.regularizer;
    study.method = c.method;
    study.estimator_edges = c.estimator_edges;
    study.levels = c.levels;
    study.theta = c.theta.value_or(0.5);
    study.max_dofs = c.max_dofs;
    study.max_iters = c.max_iters;
    return study;
}

ConvergenceRecord run_study(const RunConfig& c, LevelObserver observer)
{
    StudyConfig study = make_study(c);
    study.observer = std::move(observer);
    return c.mode == RefinementMode::Adaptive ? run_adaptive(study) : run_uniform(study);
}

}  // namespace roughstokes
