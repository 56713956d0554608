#include "crq/hvmodel/conditioning.hpp"

namespace crq::hvmodel {

ConditionalTable condition_table(const ConditionalTable& table, const OutcomeEvent& event) {
    const auto& ctx = table.context();
    const std::size_t n = ctx.outcome_count();
    std::vector<bool> in(n, false);
    bool any = false;
    for (std::size_t flat = 0; flat < n; ++flat) {
        in[flat] = event(ctx.unflatten(flat));
        any = any || in[flat];
    }
    if (!any) throw Error(ErrorKind::EmptyEvent, "no outcome satisfies the conditioning event");

    std::vector<std::vector<double>> rows;
    std::vector<bool> degenerate;
    for (std::size_t k = 0; k < table.labels().size(); ++k) {
        const auto& r = table.row(k);
        double mass = 0.0;
        bool outside = false;
        for (std::size_t flat = 0; flat < n; ++flat) {
            if (in[flat])
                mass += r[flat];
            else if (r[flat] != 0.0)
                outside = true;
        }
        std::vector<double> out(n, 0.0);
        bool degen = table.degenerate(k) || mass <= kNullEvent;
        if (!degen && !outside)
            out = r;
        else if (!degen)
            for (std::size_t flat = 0; flat < n; ++flat)
                if (in[flat]) out[flat] = r[flat] / mass;
        rows.push_back(std::move(out));
        degenerate.push_back(degen);
    }
    return ConditionalTable(ctx, table.labels(), std::move(rows), std::move(degenerate));
}

}  // namespace crq::hvmodel
