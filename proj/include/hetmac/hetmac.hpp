#ifndef HETMAC_HETMAC_HPP
#define HETMAC_HETMAC_HPP

#include <hetmac/allocation.hpp>
#include <hetmac/channel.hpp>
#include <hetmac/constellation.hpp>
#include <hetmac/detmac.hpp>
#include <hetmac/error.hpp>
#include <hetmac/f2matrix.hpp>
#include <hetmac/fblrate.hpp>
#include <hetmac/infodensity.hpp>
#include <hetmac/pipeline.hpp>
#include <hetmac/report.hpp>
#include <hetmac/scenario.hpp>
#include <hetmac/signaling.hpp>

#endif // HETMAC_HETMAC_HPP
