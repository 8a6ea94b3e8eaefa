#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "ldm/continuity.hpp"
#include "ldm/due.hpp"
#include "ldm/effective_delay.hpp"
#include "ldm/loader.hpp"
#include "ldm/network.hpp"

namespace ldm {

/// 17 significant digits, so the text round-trips to the same double.
std::string format_number(double x);

nlohmann::json to_json(const CumulativeCurve& c);
nlohmann::json to_json(const ExitTimeFunction& tau);
nlohmann::json to_json(const LoadingResult& result);
nlohmann::json to_json(const MonotonicityAudit& audit);
nlohmann::json to_json(const EquilibriumCertificate& cert, const Network& net);
nlohmann::json to_json(const ConvergenceReport& report, const Network& net);

/// path_id,departure_time,delay,effective_delay
void write_delay_csv(std::ostream& os, const DelayField& field, const Network& net);
/// origin,destination,v
void write_od_csv(std::ostream& os, const DelayField& field, const Network& net);
/// iteration,gap,max_support_residual,l2_step
void write_convergence_csv(std::ostream& os, const EquilibriumCertificate& cert);
/// n,input_l2,sup_D,sup_Psi,l2_Psi,clipped,truncated
void write_report_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace ldm
