#include "kqlearn/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <variant>

#include "kqlearn/errors.hpp"

namespace kqlearn {

KernelSpec kernel_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw InputError("kernel spec must be an object with a \"kind\"");
    const auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "se") return KernelSpec::squared_exponential(j.value("lengthscale", 0.2));
        if (kind == "matern") return KernelSpec::matern(j.value("nu", 2.5), j.value("lengthscale", 0.2));
        if (kind == "linear") return KernelSpec::linear(j.value("offset", 0.0));
        if (kind == "finite_rank") return KernelSpec::finite_rank(j.at("eigenvalues").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed kernel spec: ") + e.what());
    }
    throw InputError("unknown kernel kind \"" + kind + "\"");
}

Json kernel_to_json(const KernelSpec& k) {
    Json j;
    j["kind"] = k.kind();
    if (const auto* se = std::get_if<SquaredExponential>(&k.variant())) j["lengthscale"] = se->lengthscale;
    if (const auto* m = std::get_if<Matern>(&k.variant())) {
        j["nu"] = m->nu;
        j["lengthscale"] = m->lengthscale;
    }
    if (const auto* l = std::get_if<Linear>(&k.variant())) j["offset"] = l->offset;
    if (const auto* f = std::get_if<FiniteRank>(&k.variant())) j["eigenvalues"] = f->eigenvalues;
    return j;
}

FiniteMdp mdp_from_json(const Json& j) {
    try {
        const auto S = j.at("n_states").get<std::size_t>();
        const auto A = j.at("n_actions").get<std::size_t>();
        const auto gamma = j.at("gamma").get<double>();
        const auto& tr = j.at("transition");
        if (!tr.is_array() || tr.size() != S) throw InputError("transition must be an n_states array");
        std::vector<double> flat;
        flat.reserve(S * A * S);
        for (const auto& per_state : tr) {
            if (per_state.size() != A) throw InputError("transition[s] must hold n_actions rows");
            for (const auto& row : per_state) {
                if (row.size() != S) throw InputError("transition rows must hold n_states entries");
                for (const auto& p : row) flat.push_back(p.get<double>());
            }
        }
        const auto& rw = j.at("reward");
        if (!rw.is_array() || rw.size() != S) throw InputError("reward must be an n_states array");
        Eigen::MatrixXd reward(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
        for (std::size_t s = 0; s < S; ++s) {
            if (rw[s].size() != A) throw InputError("reward rows must hold n_actions entries");
            for (std::size_t a = 0; a < A; ++a)
                reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = rw[s][a].get<double>();
        }
        PointList embedding;
        for (const auto& p : j.at("embedding")) {
            const auto coords = p.get<std::vector<double>>();
            embedding.push_back(Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size())));
        }
        return FiniteMdp(S, A, std::move(flat), std::move(reward), gamma, std::move(embedding));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed MDP JSON: ") + e.what());
    }
}

Json mdp_to_json(const FiniteMdp& m) {
    Json j;
    j["n_states"] = m.n_states();
    j["n_actions"] = m.n_actions();
    j["gamma"] = m.gamma();
    Json tr = Json::array();
    Json rw = Json::array();
    for (std::size_t s = 0; s < m.n_states(); ++s) {
        Json per_state = Json::array();
        Json rrow = Json::array();
        for (std::size_t a = 0; a < m.n_actions(); ++a) {
            per_state.push_back(std::vector<double>(m.row(s, a), m.row(s, a) + m.n_states()));
            rrow.push_back(m.r(s, a));
        }
        tr.push_back(std::move(per_state));
        rw.push_back(std::move(rrow));
    }
    j["transition"] = std::move(tr);
    j["reward"] = std::move(rw);
    Json emb = Json::array();
    for (const auto& z : m.embedding()) emb.push_back(std::vector<double>(z.data(), z.data() + z.size()));
    j["embedding"] = std::move(emb);
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

Json json_from_text_or_file(const std::string& text_or_path) {
    const auto first = text_or_path.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text_or_path[first] == '{') {
        try {
            return Json::parse(text_or_path);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("invalid JSON: ") + e.what());
        }
    }
    return read_json_file(text_or_path);
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError("not a number: \"" + std::string(s) + "\"");
    return x;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

PointList read_points_csv(std::istream& in) {
    PointList pts;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<double> coords;
        try {
            for (const auto& f : fields) coords.push_back(parse_double(f));
        } catch (const InputError&) {
            if (first) {
                first = false;
                continue;
            }
            throw;
        }
        first = false;
        if (!pts.empty() && static_cast<std::size_t>(pts.front().size()) != coords.size())
            throw InputError("point rows have different widths");
        pts.push_back(Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size())));
    }
    return pts;
}

void write_design_csv(std::ostream& out, const GreedyTrace& trace, const std::vector<double>& gain_prefix) {
    if (gain_prefix.size() != trace.selected.size()) throw InputError("info-gain prefix does not match the trace");
    out << "step,grid_index,sigma2,info_gain_prefix\n";
    for (std::size_t j = 0; j < trace.selected.size(); ++j)
        out << j + 1 << ',' << trace.selected[j] << ',' << format_double(trace.sigma2_at_selection[j]) << ','
            << format_double(gain_prefix[j]) << '\n';
}

void write_oracle_csv(std::ostream& out, const OptimalValues& values) {
    out << "state,action,q_star,v_star\n";
    for (Eigen::Index s = 0; s < values.q.rows(); ++s)
        for (Eigen::Index a = 0; a < values.q.cols(); ++a)
            out << s << ',' << a << ',' << format_double(values.q(s, a)) << ',' << format_double(values.v[s]) << '\n';
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace kqlearn
