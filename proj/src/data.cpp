#include "cace/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cace/error.hpp"

namespace cace {

namespace {

bool is_binary(double v) { return std::abs(v) <= 1e-9 || std::abs(v - 1.0) <= 1e-9; }

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    auto where = [&] { return "row " + std::to_string(row) + ", column '" + column + "'"; };
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan")
        throw DataError("missing value at " + where());
    const char* first = cell.data();
    if (*first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError("non-numeric value '" + cell + "' at " + where());
    if (!std::isfinite(value)) throw DataError("non-finite value at " + where());
    return value;
}

}  // namespace

ExperimentData ExperimentData::create(Assignment z, Eigen::VectorXd w, Eigen::VectorXd y, Eigen::MatrixXd x,
                                      std::vector<std::string> covariate_names) {
    const auto n = z.size();
    if (static_cast<std::size_t>(w.size()) != n || static_cast<std::size_t>(y.size()) != n)
        throw DataError("z, w and y must have the same length");
    if (x.size() == 0) x.resize(static_cast<Eigen::Index>(n), 0);
    if (static_cast<std::size_t>(x.rows()) != n) throw DataError("covariate matrix has the wrong number of rows");
    if (n < 4) throw DataError("n < 4");

    std::size_t n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (z[i] > 1) throw DataError("z must be 0 or 1 (unit " + std::to_string(i) + ")");
        n1 += z[i];
        if (!is_binary(w[static_cast<Eigen::Index>(i)]))
            throw DataError("w must be 0 or 1 (unit " + std::to_string(i) + ")");
    }
    if (n1 < 2) throw DataError("n1 < 2");
    if (n - n1 < 2) throw DataError("n0 < 2");
    w = w.array().round();
    if (!y.allFinite()) throw DataError("y contains NaN or Inf");
    if (!x.allFinite()) throw DataError("covariates contain NaN or Inf");

    if (covariate_names.empty()) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) covariate_names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(covariate_names.size()) != x.cols())
        throw DataError("covariate name count does not match column count");

    ExperimentData d;
    d.means_ = x.cols() > 0 ? Eigen::VectorXd(x.colwise().mean().transpose()) : Eigen::VectorXd(0);
    if (x.cols() > 0) x.rowwise() -= d.means_.transpose();
    d.z_ = std::move(z);
    d.w_ = std::move(w);
    d.y_ = std::move(y);
    d.x_ = std::move(x);
    d.names_ = std::move(covariate_names);
    d.n1_ = n1;
    return d;
}

ExperimentData ExperimentData::with_outcome(Eigen::VectorXd y) const {
    if (y.size() != y_.size()) throw DataError("outcome length mismatch");
    if (!y.allFinite()) throw DataError("y contains NaN or Inf");
    ExperimentData d = *this;
    d.y_ = std::move(y);
    return d;
}

ExperimentData parse_csv(const std::string& text, const CovariateSelection& selection) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            header = split_row(line);
            break;
        }
    }
    if (header.empty()) throw DataError("empty CSV");
    if (!header[0].empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0] = header[0].substr(3);

    auto find_column = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("missing column '" + name + "'");
        if (std::find(it + 1, header.end(), name) != header.end())
            throw DataError("duplicate column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto zc = find_column("z");
    const auto wc = find_column("w");
    const auto yc = find_column("y");

    std::vector<std::size_t> cov_cols;
    std::vector<std::string> cov_names;
    switch (selection.mode) {
    case CovariateSelection::Mode::all:
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j == zc || j == wc || j == yc) continue;
            cov_cols.push_back(j);
            cov_names.push_back(header[j]);
        }
        break;
    case CovariateSelection::Mode::none:
        break;
    case CovariateSelection::Mode::named:
        for (const auto& name : selection.names) {
            if (name == "z" || name == "w" || name == "y")
                throw DataError("'" + name + "' cannot be used as a covariate");
            cov_cols.push_back(find_column(name));
            cov_names.push_back(name);
        }
        break;
    }

    std::vector<double> zs, ws, ys, xs;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split_row(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        double zv = parse_cell(cells[zc], row, "z");
        double wv = parse_cell(cells[wc], row, "w");
        if (!is_binary(zv)) throw DataError("z must be 0 or 1 (row " + std::to_string(row) + ")");
        if (!is_binary(wv)) throw DataError("w must be 0 or 1 (row " + std::to_string(row) + ")");
        zs.push_back(zv);
        ws.push_back(std::round(wv));
        ys.push_back(parse_cell(cells[yc], row, "y"));
        for (std::size_t j = 0; j < cov_cols.size(); ++j) xs.push_back(parse_cell(cells[cov_cols[j]], row, cov_names[j]));
    }

    const auto n = zs.size();
    const auto k = cov_cols.size();
    Assignment z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<std::uint8_t>(std::lround(zs[i]));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i * k + j];
    return ExperimentData::create(std::move(z), Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<Eigen::Index>(n)),
                                  Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(n)), std::move(x),
                                  std::move(cov_names));
}

ExperimentData load_csv(const std::filesystem::path& path, const CovariateSelection& selection) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), selection);
}

double difference_in_means(std::span<const double> q, const Assignment& z) {
    if (q.size() != z.size()) throw DataError("difference_in_means: length mismatch");
    double sum1 = 0.0, sum0 = 0.0;
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (z[i]) {
            sum1 += q[i];
            ++n1;
        } else {
            sum0 += q[i];
        }
    }
    const auto n0 = q.size() - n1;
    if (n1 == 0 || n0 == 0) throw DataError("difference_in_means: empty arm");
    return sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
}

double difference_in_means(const Eigen::VectorXd& q, const Assignment& z) { return difference_in_means(as_span(q), z); }

double sample_covariance(std::span<const double> q, std::span<const double> r) {
    if (q.size() != r.size()) throw DataError("sample_covariance: length mismatch");
    if (q.size() < 2) throw DataError("sample variance needs at least 2 values");
    const double n = static_cast<double>(q.size());
    double mq = 0.0, mr = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        mq += q[i];
        mr += r[i];
    }
    mq /= n;
    mr /= n;
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += (q[i] - mq) * (r[i] - mr);
    return s / (n - 1.0);
}

double sample_variance(std::span<const double> q) { return sample_covariance(q, q); }

double arm_covariance(const Eigen::VectorXd& q, const Eigen::VectorXd& r, const Assignment& z, int arm) {
    std::vector<double> qa, ra;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == arm) {
            qa.push_back(q[static_cast<Eigen::Index>(i)]);
            ra.push_back(r[static_cast<Eigen::Index>(i)]);
        }
    }
    return sample_covariance(qa, ra);
}

double arm_variance(const Eigen::VectorXd& q, const Assignment& z, int arm) { return arm_covariance(q, q, z, arm); }

}  // namespace cace
