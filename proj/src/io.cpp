#include "ampsdp/io.hpp"

#include "ampsdp/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ampsdp {

namespace {

using json = nlohmann::json;

json vec_json(const Eigen::VectorXd& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd json_vec(const json& j)
{
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

}  // namespace

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw input_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text)
{
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw input_error("cannot write " + path);
        out << text;
        if (!out)
            throw input_error("write failed for " + path);
    }
    std::filesystem::rename(tmp, p);
}

void save_moments(const std::string& path, const Eigen::MatrixXd& m)
{
    if (m.rows() != m.cols())
        throw input_error("moment matrix must be square");
    symmetric_matrix s(static_cast<int>(m.rows()));
    for (int i = 0; i < s.size(); ++i)
        for (int j = i; j < s.size(); ++j)
            s.set(i, j, m(i, j));
    const std::string tmp = path + ".tmp";
    save_symmat(tmp, s);
    std::filesystem::rename(tmp, path);
}

Eigen::MatrixXd load_moments(const std::string& path) { return load_symmat(path).dense(); }

std::string to_json(const amp_trace& tr)
{
    json its = json::array();
    for (const auto& x : tr.iterates)
        its.push_back(vec_json(x));
    return json{{"steps", tr.steps()}, {"n", tr.n}, {"normalization", tr.normalization}, {"onsager", tr.onsager}, {"iterates", its}}.dump();
}

amp_trace trace_from_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        amp_trace tr;
        tr.n = j.at("n").get<int>();
        tr.normalization = j.at("normalization").get<double>();
        tr.onsager = j.at("onsager").get<std::vector<std::vector<double>>>();
        for (const auto& x : j.at("iterates"))
            tr.iterates.push_back(json_vec(x));
        return tr;
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed trace: ") + e.what());
    }
}

std::string vector_to_json(const Eigen::VectorXd& v) { return vec_json(v).dump(); }

Eigen::VectorXd vector_from_json(const std::string& text)
{
    try {
        return json_vec(json::parse(text));
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed vector: ") + e.what());
    }
}

std::string to_json(const state_evolution_table& se)
{
    json q = json::array();
    for (Eigen::Index i = 0; i < se.Q.rows(); ++i)
        q.push_back(vec_json(se.Q.row(i).transpose()));
    return json{{"t", se.t}, {"mc_samples", se.mc_samples}, {"seed", se.seed}, {"Q", q}}.dump(1);
}

std::uint64_t stable_hash(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t x)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

}  // namespace ampsdp
