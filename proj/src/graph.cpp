#include "ricci/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace ricci {

using nlohmann::json;

std::vector<int> Graph::neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
        if (adjacency(i, j) > 0.0) out.push_back(j);
    return out;
}

int Graph::num_edges() const {
    int count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacency(i, j) > 0.0) ++count;
    return count;
}

int Graph::num_classes() const {
    if (labels.empty()) return 0;
    return *std::max_element(labels.begin(), labels.end()) + 1;
}

void Graph::validate() const {
    if (adjacency.rows() != n || adjacency.cols() != n)
        throw std::runtime_error("adjacency shape does not match node count");
    for (int i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0)
            throw std::runtime_error("adjacency diagonal must be zero");
        for (int j = 0; j < n; ++j) {
            if (adjacency(i, j) < 0.0)
                throw std::runtime_error("adjacency entries must be nonnegative");
            if (std::abs(adjacency(i, j) - adjacency(j, i)) > 1e-12)
                throw std::runtime_error("adjacency must be symmetric");
        }
    }
    if (has_features() && features.rows() != n)
        throw std::runtime_error("feature rows must match node count");
    if (has_labels() && static_cast<int>(labels.size()) != n)
        throw std::runtime_error("label count must match node count");
    auto check_split = [&](const std::vector<int>& s, const char* name) {
        for (int idx : s)
            if (idx < 0 || idx >= n)
                throw std::runtime_error(std::string("split index out of range in ") + name);
    };
    check_split(splits.train, "train");
    check_split(splits.val, "val");
    check_split(splits.test, "test");
    std::set<int> seen;
    for (const auto* s : {&splits.train, &splits.val, &splits.test})
        for (int idx : *s)
            if (!seen.insert(idx).second)
                throw std::runtime_error("splits must be pairwise disjoint");
}

namespace {

void add_edge_symmetrized(Eigen::MatrixXd& a, int i, int j, double w, int n) {
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::runtime_error("edge endpoint out of range: (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
    if (i == j) return;  // self loops dropped
    double v = std::max({a(i, j), a(j, i), w});
    a(i, j) = v;
    a(j, i) = v;
}

Graph graph_from_json(const json& doc) {
    Graph g;
    if (!doc.contains("num_nodes")) throw std::runtime_error("missing num_nodes");
    g.n = doc.at("num_nodes").get<int>();
    if (g.n < 0) throw std::runtime_error("negative num_nodes");
    g.adjacency = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& e : doc.value("edges", json::array())) {
        if (!e.is_array() || e.size() < 2 || e.size() > 3)
            throw std::runtime_error("edge must be [i,j] or [i,j,w]");
        double w = e.size() == 3 ? e.at(2).get<double>() : 1.0;
        if (w < 0.0) throw std::runtime_error("negative edge weight");
        add_edge_symmetrized(g.adjacency, e.at(0).get<int>(), e.at(1).get<int>(), w, g.n);
    }
    if (doc.contains("features")) {
        const auto& rows = doc.at("features");
        if (static_cast<int>(rows.size()) != g.n)
            throw std::runtime_error("feature rows must match num_nodes");
        int f = rows.empty() ? 0 : static_cast<int>(rows.at(0).size());
        g.features.resize(g.n, f);
        for (int i = 0; i < g.n; ++i) {
            if (static_cast<int>(rows.at(i).size()) != f)
                throw std::runtime_error("ragged feature rows");
            for (int c = 0; c < f; ++c) g.features(i, c) = rows.at(i).at(c).get<double>();
        }
    }
    if (doc.contains("labels")) {
        g.labels = doc.at("labels").get<std::vector<int>>();
    }
    if (doc.contains("splits")) {
        const auto& s = doc.at("splits");
        g.splits.train = s.value("train", std::vector<int>{});
        g.splits.val = s.value("val", std::vector<int>{});
        g.splits.test = s.value("test", std::vector<int>{});
    }
    g.validate();
    return g;
}

std::string strip_extension(const std::string& path) {
    auto slash = path.find_last_of('/');
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

Graph graph_from_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    struct Edge { int i, j; double w; };
    std::vector<Edge> edges;
    int max_node = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Edge e{-1, -1, 1.0};
        if (!(ss >> e.i >> e.j))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": parse failure");
        ss >> e.w;
        if (e.w < 0.0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": negative weight");
        max_node = std::max({max_node, e.i, e.j});
        edges.push_back(e);
    }
    Graph g;
    g.n = max_node + 1;
    g.adjacency = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& e : edges) add_edge_symmetrized(g.adjacency, e.i, e.j, e.w, g.n);

    std::string stem = strip_extension(path);
    std::ifstream feats(stem + ".features.csv");
    if (feats) {
        std::vector<std::vector<double>> rows;
        while (std::getline(feats, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::istringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            rows.push_back(std::move(row));
        }
        if (static_cast<int>(rows.size()) != g.n)
            throw std::runtime_error("feature CSV row count does not match node count");
        int f = rows.empty() ? 0 : static_cast<int>(rows[0].size());
        g.features.resize(g.n, f);
        for (int i = 0; i < g.n; ++i) {
            if (static_cast<int>(rows[i].size()) != f)
                throw std::runtime_error("ragged feature CSV");
            for (int c = 0; c < f; ++c) g.features(i, c) = rows[i][c];
        }
    }
    std::ifstream labs(stem + ".labels.csv");
    if (labs) {
        while (std::getline(labs, line)) {
            if (line.empty()) continue;
            g.labels.push_back(std::stoi(line));
        }
        if (static_cast<int>(g.labels.size()) != g.n)
            throw std::runtime_error("label CSV row count does not match node count");
    }
    g.validate();
    return g;
}

}  // namespace

Graph load_graph(const std::string& path, GraphFormat format) {
    if (format == GraphFormat::json) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ": JSON parse failure: " + e.what());
        }
        return graph_from_json(doc);
    }
    return graph_from_tsv(path);
}

void export_graph(const Graph& g, ExportFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (format == ExportFormat::dot) {
        out << "graph G {\n";
        for (int i = 0; i < g.n; ++i) out << "  " << i << ";\n";
        out.precision(17);
        for (int i = 0; i < g.n; ++i)
            for (int j = i + 1; j < g.n; ++j)
                if (g.adjacency(i, j) > 0.0)
                    out << "  " << i << " -- " << j << " [weight=" << g.adjacency(i, j) << "];\n";
        out << "}\n";
        return;
    }
    json doc;
    doc["num_nodes"] = g.n;
    json edges = json::array();
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency(i, j) > 0.0) {
                if (g.adjacency(i, j) == 1.0)
                    edges.push_back({i, j});
                else
                    edges.push_back({i, j, g.adjacency(i, j)});
            }
    doc["edges"] = std::move(edges);
    if (g.has_features()) {
        json rows = json::array();
        for (int i = 0; i < g.n; ++i) {
            json row = json::array();
            for (int c = 0; c < g.features.cols(); ++c) row.push_back(g.features(i, c));
            rows.push_back(std::move(row));
        }
        doc["features"] = std::move(rows);
    }
    if (g.has_labels()) doc["labels"] = g.labels;
    if (g.has_splits()) {
        doc["splits"] = {{"train", g.splits.train}, {"val", g.splits.val}, {"test", g.splits.test}};
    }
    out << doc.dump() << "\n";
}

Graph make_karate() {
    // Zachary (1977), 0-indexed.
    static const int edges[78][2] = {
        {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
        {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
        {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
        {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
        {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
        {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
        {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
        {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
        {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
        {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
    Graph g;
    g.n = 34;
    g.adjacency = Eigen::MatrixXd::Zero(34, 34);
    for (const auto& e : edges) add_edge_symmetrized(g.adjacency, e[0], e[1], 1.0, 34);
    // Community membership after the club fission.
    static const int officer[] = {9, 14, 15, 18, 20, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33};
    g.labels.assign(34, 0);
    for (int v : officer) g.labels[v] = 1;
    return g;
}

Graph make_barbell(int k) {
    if (k < 2) throw std::runtime_error("barbell needs cliques of size >= 2");
    Graph g;
    g.n = 2 * k;
    g.adjacency = Eigen::MatrixXd::Zero(g.n, g.n);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            g.adjacency(i, j) = g.adjacency(j, i) = 1.0;
            g.adjacency(k + i, k + j) = g.adjacency(k + j, k + i) = 1.0;
        }
    g.adjacency(k - 1, k) = g.adjacency(k, k - 1) = 1.0;  // bridge
    g.labels.assign(g.n, 0);
    for (int i = k; i < 2 * k; ++i) g.labels[i] = 1;
    return g;
}

Graph make_sbm(const std::vector<int>& sizes, double p_in, double p_out, std::uint64_t seed) {
    if (sizes.empty()) throw std::runtime_error("sbm needs at least one block");
    for (int s : sizes)
        if (s <= 0) throw std::runtime_error("sbm block sizes must be positive");
    if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1)
        throw std::runtime_error("sbm probabilities must lie in [0,1]");
    Graph g;
    g.n = 0;
    std::vector<int> block;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        g.n += sizes[b];
        block.insert(block.end(), sizes[b], static_cast<int>(b));
    }
    g.adjacency = Eigen::MatrixXd::Zero(g.n, g.n);
    Rng rng(seed);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j) {
            double p = block[i] == block[j] ? p_in : p_out;
            if (rng.uniform() < p) g.adjacency(i, j) = g.adjacency(j, i) = 1.0;
        }
    g.labels = block;
    return g;
}

Eigen::MatrixXd lazy_walk_matrix(const Graph& g, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::runtime_error("alpha must lie in [0,1]");
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g.n, g.n);
    for (int i = 0; i < g.n; ++i) {
        double deg = g.weighted_degree(i);
        if (deg <= 0.0) {
            l(i, i) = 1.0;  // isolated node: mass stays put
            continue;
        }
        l(i, i) = alpha;
        l.row(i) += (1.0 - alpha) / deg * g.adjacency.row(i);
    }
    return l;
}

Eigen::VectorXd hop_distances_from(const Graph& g, int src) {
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(g.n, hop_sentinel(g));
    std::deque<int> queue{src};
    dist(src) = 0.0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v = 0; v < g.n; ++v)
            if (g.adjacency(u, v) > 0.0 && dist(v) >= hop_sentinel(g)) {
                dist(v) = dist(u) + 1.0;
                queue.push_back(v);
            }
    }
    return dist;
}

double hop_distance(const Graph& g, int i, int j) {
    if (i < 0 || j < 0 || i >= g.n || j >= g.n) throw std::runtime_error("node index out of range");
    if (i == j) return 0.0;
    return hop_distances_from(g, i)(j);
}

Eigen::VectorXd weighted_distances_from(const Graph& g, int src) {
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(g.n, inf);
    dist(src) = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0.0, src});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist(u)) continue;
        for (int v = 0; v < g.n; ++v) {
            double w = g.adjacency(u, v);
            if (w <= 0.0) continue;
            if (d + w < dist(v)) {
                dist(v) = d + w;
                heap.push({dist(v), v});
            }
        }
    }
    for (int v = 0; v < g.n; ++v)
        if (dist(v) == inf) dist(v) = hop_sentinel(g);
    return dist;
}

namespace {
std::vector<int> component_of(const Graph& g, int start, std::vector<char>& visited) {
    std::vector<int> comp{start};
    visited[start] = 1;
    for (std::size_t k = 0; k < comp.size(); ++k) {
        int u = comp[k];
        for (int v = 0; v < g.n; ++v)
            if (g.adjacency(u, v) > 0.0 && !visited[v]) {
                visited[v] = 1;
                comp.push_back(v);
            }
    }
    return comp;
}
}  // namespace

bool is_connected(const Graph& g) {
    if (g.n == 0) return true;
    std::vector<char> visited(g.n, 0);
    return static_cast<int>(component_of(g, 0, visited).size()) == g.n;
}

Graph largest_component(const Graph& g, bool* was_disconnected) {
    std::vector<char> visited(g.n, 0);
    std::vector<int> best;
    for (int i = 0; i < g.n; ++i)
        if (!visited[i]) {
            auto comp = component_of(g, i, visited);
            if (comp.size() > best.size()) best = std::move(comp);
        }
    if (was_disconnected) *was_disconnected = static_cast<int>(best.size()) != g.n;
    if (static_cast<int>(best.size()) == g.n) return g;

    std::sort(best.begin(), best.end());
    std::vector<int> remap(g.n, -1);
    for (std::size_t k = 0; k < best.size(); ++k) remap[best[k]] = static_cast<int>(k);
    Graph out;
    out.n = static_cast<int>(best.size());
    out.adjacency.resize(out.n, out.n);
    for (int a = 0; a < out.n; ++a)
        for (int b = 0; b < out.n; ++b) out.adjacency(a, b) = g.adjacency(best[a], best[b]);
    if (g.has_features()) {
        out.features.resize(out.n, g.features.cols());
        for (int a = 0; a < out.n; ++a) out.features.row(a) = g.features.row(best[a]);
    }
    if (g.has_labels()) {
        out.labels.resize(out.n);
        for (int a = 0; a < out.n; ++a) out.labels[a] = g.labels[best[a]];
    }
    auto remap_split = [&](const std::vector<int>& s) {
        std::vector<int> r;
        for (int idx : s)
            if (remap[idx] >= 0) r.push_back(remap[idx]);
        return r;
    };
    out.splits.train = remap_split(g.splits.train);
    out.splits.val = remap_split(g.splits.val);
    out.splits.test = remap_split(g.splits.test);
    return out;
}

}  // namespace ricci
