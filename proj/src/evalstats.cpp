#include "mrl/evalstats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mrl/errors.hpp"
#include "mrl/solver.hpp"

namespace mrl {

namespace {

// Midranks of the pooled sample; doubled so they stay integral under ties.
std::vector<long> doubled_midranks(const std::vector<double>& pooled_sorted) {
    const std::size_t n = pooled_sorted.size();
    std::vector<long> doubled(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled_sorted[j + 1] == pooled_sorted[i]) ++j;
        // ranks i+1 .. j+1 share the midrank (i+j+2)/2; doubled = i+j+2.
        const long dbl = static_cast<long>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) doubled[k] = dbl;
        i = j + 1;
    }
    return doubled;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / 1.4142135623730951); }

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw InputError("mann-whitney: samples must be non-empty");

    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;

    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = pooled[order[i]];
    const std::vector<long> doubled = doubled_midranks(sorted);

    // Doubled rank sum of sample a.
    long w2 = 0;
    std::vector<long> items(n);  // doubled midrank per pooled item
    for (std::size_t i = 0; i < n; ++i) items[order[i]] = doubled[i];
    for (std::size_t i = 0; i < n1; ++i) w2 += items[i];
    const double u = 0.5 * static_cast<double>(w2) -
                     0.5 * static_cast<double>(n1 * (n1 + 1));

    MannWhitneyResult result{u, 1.0, n <= 12};
    if (result.exact) {
        // Null distribution of the doubled rank sum over all size-n1 subsets:
        // subset-sum counting DP.
        long max_sum = 0;
        for (std::size_t i = 0; i < n; ++i) max_sum += doubled[i];
        std::vector<std::vector<double>> ways(
            n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const long r = doubled[i];
            for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
                for (long s = max_sum; s >= r; --s) {
                    const double add = ways[k - 1][static_cast<std::size_t>(s - r)];
                    if (add != 0.0) ways[k][static_cast<std::size_t>(s)] += add;
                }
            }
        }
        double total = 0.0, le = 0.0, ge = 0.0;
        for (long s = 0; s <= max_sum; ++s) {
            const double c = ways[n1][static_cast<std::size_t>(s)];
            if (c == 0.0) continue;
            total += c;
            if (s <= w2) le += c;
            if (s >= w2) ge += c;
        }
        result.p = std::min(1.0, 2.0 * std::min(le / total, ge / total));
        return result;
    }

    const double mu = 0.5 * static_cast<double>(n1) * static_cast<double>(n2);
    // Tie correction over groups of equal pooled values.
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double nn = static_cast<double>(n);
    const double var = (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
                       ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (var <= 0.0) {
        result.p = 1.0;
        return result;
    }
    double cc = 0.0;  // continuity correction toward the mean
    if (u < mu) cc = 0.5;
    if (u > mu) cc = -0.5;
    const double z = (u - mu + cc) / std::sqrt(var);
    result.p = std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
    return result;
}

std::vector<std::size_t> RatingMatrix::raters_of(bool vlm) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rater_count(); ++i) {
        if (is_vlm[i] == vlm) out.push_back(i);
    }
    return out;
}

int divergence_profile(const RatingMatrix& matrix, std::size_t rater, double alpha) {
    if (rater >= matrix.rater_count()) throw InputError("divergence: rater index out of range");
    const std::vector<std::size_t> participants = matrix.raters_of(false);
    int count = 0;
    for (std::size_t cell = 0; cell < matrix.cell_count(); ++cell) {
        std::vector<double> own{static_cast<double>(matrix.scores[rater][cell])};
        std::vector<double> rest;
        rest.reserve(participants.size());
        for (const std::size_t p : participants) {
            if (p == rater) continue;  // leave-one-out for participants
            rest.push_back(static_cast<double>(matrix.scores[p][cell]));
        }
        if (rest.empty()) continue;
        if (mann_whitney_u(own, rest).p < alpha) ++count;
    }
    return count;
}

double bootstrap_population_test(const RatingMatrix& matrix, int iterations,
                                 std::uint64_t seed) {
    if (iterations < 1) throw InputError("bootstrap: iterations must be >= 1");
    const std::vector<std::size_t> vlms = matrix.raters_of(true);
    const std::vector<std::size_t> participants = matrix.raters_of(false);
    if (vlms.empty() || participants.empty())
        throw InputError("bootstrap: both populations must be non-empty");

    std::vector<int> divergence(matrix.rater_count());
    for (std::size_t r = 0; r < matrix.rater_count(); ++r)
        divergence[r] = divergence_profile(matrix, r);

    Rng rng(derive_stream(seed, 0));
    double wins = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const int dv = divergence[vlms[rng.next_index(vlms.size())]];
        const int dp = divergence[participants[rng.next_index(participants.size())]];
        if (dv > dp)
            wins += 1.0;
        else if (dv == dp)
            wins += 0.5;  // identical counts split evenly
    }
    return wins / static_cast<double>(iterations);
}

namespace {

ReasonCategory modal_of(const std::vector<ReasonCategory>& cats) {
    std::array<int, kCategoryCount> counts{};
    for (const ReasonCategory c : cats) counts[static_cast<int>(c)]++;
    int best = 0;
    for (int i = 1; i < kCategoryCount; ++i) {
        if (counts[i] > counts[best]) best = i;
    }
    return static_cast<ReasonCategory>(best);
}

}  // namespace

double mode_agreement(const std::vector<std::vector<ReasonCategory>>& cells_a,
                      const std::vector<std::vector<ReasonCategory>>& cells_b,
                      const std::vector<bool>& unsuitable_mask) {
    if (cells_a.size() != cells_b.size() || cells_a.size() != unsuitable_mask.size())
        throw InputError("mode agreement: mismatched cell counts");
    int considered = 0;
    int agree = 0;
    for (std::size_t c = 0; c < cells_a.size(); ++c) {
        if (!unsuitable_mask[c]) continue;
        ++considered;
        if (modal_of(cells_a[c]) == modal_of(cells_b[c])) ++agree;
    }
    return considered == 0 ? 0.0 : static_cast<double>(agree) / considered;
}

std::vector<double> cell_medians(const RatingMatrix& matrix, bool vlm) {
    const std::vector<std::size_t> raters = matrix.raters_of(vlm);
    std::vector<double> medians(matrix.cell_count(), 0.0);
    for (std::size_t cell = 0; cell < matrix.cell_count(); ++cell) {
        std::vector<int> scores;
        scores.reserve(raters.size());
        for (const std::size_t r : raters) scores.push_back(matrix.scores[r][cell]);
        std::sort(scores.begin(), scores.end());
        const std::size_t n = scores.size();
        medians[cell] =
            n % 2 == 1 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
    }
    return medians;
}

std::vector<bool> unsuitable_mask(const RatingMatrix& matrix) {
    const std::vector<double> mp = cell_medians(matrix, false);
    const std::vector<double> mv = cell_medians(matrix, true);
    std::vector<bool> mask(matrix.cell_count());
    for (std::size_t c = 0; c < matrix.cell_count(); ++c)
        mask[c] = mp[c] < 3.0 && mv[c] < 3.0;
    return mask;
}

std::vector<std::vector<ReasonCategory>> cell_categories(const RatingMatrix& matrix, bool vlm) {
    if (!matrix.has_categories())
        throw InputError("mode agreement requires a category column");
    const std::vector<std::size_t> raters = matrix.raters_of(vlm);
    std::vector<std::vector<ReasonCategory>> cells(matrix.cell_count());
    for (std::size_t cell = 0; cell < matrix.cell_count(); ++cell) {
        for (const std::size_t r : raters) cells[cell].push_back(matrix.categories[r][cell]);
    }
    return cells;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

struct Row {
    std::string rater;
    bool vlm;
    std::string cell;
    int score;
    ReasonCategory category;
    bool has_category;
};

}  // namespace

std::vector<std::pair<std::string, RatingMatrix>> load_rating_matrices(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw InputError("ratings csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* required : {"rater_id", "population", "scenario", "area", "score"}) {
        if (!col.count(required))
            throw InputError(std::string("ratings csv: missing column '") + required + "'");
    }
    const bool has_category = col.count("category") > 0;
    const bool has_question = col.count("question") > 0;

    std::map<std::string, std::vector<Row>> by_question;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < header.size())
            throw InputError("ratings csv: too few fields at line " + std::to_string(line_no));
        Row row;
        row.rater = f[col.at("rater_id")];
        const std::string pop = f[col.at("population")];
        if (pop == "vlm")
            row.vlm = true;
        else if (pop == "participant")
            row.vlm = false;
        else
            throw InputError("ratings csv: population must be participant|vlm at line " +
                             std::to_string(line_no));
        row.cell = f[col.at("scenario")] + '\x1f' + f[col.at("area")];
        try {
            row.score = std::stoi(f[col.at("score")]);
        } catch (...) {
            throw InputError("ratings csv: bad score at line " + std::to_string(line_no));
        }
        if (row.score < 1 || row.score > 5)
            throw InputError("ratings csv: score out of 1..5 at line " + std::to_string(line_no));
        row.has_category = has_category;
        if (has_category) {
            const std::string& name = f[col.at("category")];
            const auto c = category_from_name(name);
            row.category = c ? *c : categorize_reason(name);
        }
        const std::string question = has_question ? f[col.at("question")] : "overlay";
        by_question[question].push_back(std::move(row));
    }

    std::vector<std::pair<std::string, RatingMatrix>> out;
    for (auto& [question, rows] : by_question) {
        RatingMatrix m;
        std::set<std::string> cell_set;
        std::map<std::string, std::size_t> rater_index;
        for (const Row& r : rows) cell_set.insert(r.cell);
        m.cell_keys.assign(cell_set.begin(), cell_set.end());
        std::map<std::string, std::size_t> cell_index;
        for (std::size_t i = 0; i < m.cell_keys.size(); ++i) cell_index[m.cell_keys[i]] = i;

        for (const Row& r : rows) {
            if (!rater_index.count(r.rater)) {
                rater_index[r.rater] = m.rater_ids.size();
                m.rater_ids.push_back(r.rater);
                m.is_vlm.push_back(r.vlm);
                m.scores.emplace_back(m.cell_keys.size(), 0);
                if (has_category)
                    m.categories.emplace_back(m.cell_keys.size(),
                                              ReasonCategory::unclassified);
            }
            const std::size_t ri = rater_index[r.rater];
            const std::size_t ci = cell_index[r.cell];
            m.scores[ri][ci] = r.score;
            if (has_category) m.categories[ri][ci] = r.category;
        }
        // Rectangularity: a zero slot means a rater never scored that cell.
        for (std::size_t ri = 0; ri < m.rater_count(); ++ri) {
            for (std::size_t ci = 0; ci < m.cell_count(); ++ci) {
                if (m.scores[ri][ci] == 0)
                    throw InputError("ratings csv: rater '" + m.rater_ids[ri] +
                                     "' has no score for every (scenario, area) of question '" +
                                     question + "'");
            }
        }
        out.emplace_back(question, std::move(m));
    }
    return out;
}

}  // namespace mrl
