#pragma once

#define NMOR_VERSION_MAJOR 0
#define NMOR_VERSION_MINOR 1
#define NMOR_VERSION_PATCH 0
#define NMOR_VERSION "0.1.0"
