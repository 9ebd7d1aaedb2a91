#include "agsr/agreement.hpp"

#include "agsr/errors.hpp"

#include <algorithm>

namespace agsr {

void RatingMatrix::add_rating(const std::string& item_id, const std::string& category) {
    auto [it, inserted] = item_index_.emplace(item_id, items_.size());
    if (inserted) {
        items_.push_back(Item{item_id, {}, 0});
    }
    Item& item = items_[it->second];
    item.counts[category] += 1;
    item.total += 1;
    declare_category(category);
}

void RatingMatrix::declare_category(const std::string& category) {
    if (std::find(categories_.begin(), categories_.end(), category) == categories_.end()) {
        categories_.push_back(category);
    }
}

double RatingMatrix::mean_proportion(const std::string& category) const {
    if (items_.empty()) throw EmptyInput("rating matrix has no items");
    double sum = 0.0;
    for (const auto& item : items_) {
        auto it = item.counts.find(category);
        const double r = it == item.counts.end() ? 0.0 : static_cast<double>(it->second);
        sum += r / static_cast<double>(item.total);
    }
    return sum / static_cast<double>(items_.size());
}

double percent_agreement(const RatingMatrix& m) {
    if (m.n_items() == 0) throw EmptyInput("rating matrix has no items");
    double sum = 0.0;
    for (const auto& item : m.items()) {
        if (item.total < 2) {
            throw InsufficientRaters("item \"" + item.id + "\" has fewer than 2 ratings");
        }
        const double n = static_cast<double>(item.total);
        double agree = 0.0;
        for (const auto& [cat, count] : item.counts) {
            const double r = static_cast<double>(count);
            agree += r * (r - 1.0);
        }
        sum += agree / (n * (n - 1.0));
    }
    return sum / static_cast<double>(m.n_items());
}

double gwet_ac1(const RatingMatrix& m) {
    const double pa = percent_agreement(m);
    const std::size_t k = std::max<std::size_t>(m.n_categories(), 2);
    double pe = 0.0;
    for (const auto& cat : m.categories()) {
        const double pi = m.mean_proportion(cat);
        pe += pi * (1.0 - pi);
    }
    // One-category data: the other binary pole has pi = 0 and contributes 0.
    pe /= static_cast<double>(k - 1);
    const double denom = 1.0 - pe;
    if (denom < 1e-12) throw DegenerateChance("chance agreement too close to 1");
    return (pa - pe) / denom;
}

} // namespace agsr
