"""Hand-transcribed cost expressions used as an independent oracle."""
import math

from mqka.costmodel import ProtocolName as P

ceil = math.ceil

# printed expressions, transcribed with their literal constants
HAND = {
    "transmissions": {
        P.SHI_ZHONG: lambda N: N * N,
        P.LIU: lambda N: N * (N - 1),
        P.SHUKLA: lambda N: 2 * N * N,
        P.SUN1: lambda N: ceil((N - 1) / 2) * 2 * N * 4,
        P.SUN2: lambda N: N * N,
        P.PROPOSED: lambda N: (N - 1) * 2 * 2,
    },
    "measurements": {
        P.SHI_ZHONG: lambda N: N * N * 2,
        P.LIU: lambda N: (N - 1) * N * 2,
        P.SHUKLA: lambda N: 2 * N * 2,
        P.SUN1: lambda N: 3 * N * 2,
        P.SUN2: lambda N: 4 * N,
        P.PROPOSED: lambda N: N * 2,
    },
    "decoys": {
        P.SHI_ZHONG: lambda N: N * N * 10,
        P.LIU: lambda N: (N - 1) * N * 10 * 2,
        P.SHUKLA: lambda N: N * N * 10 * 2,
        P.SUN1: lambda N: ceil((N - 1) / 2) * 2 * N * 4 * 10,
        P.SUN2: lambda N: N * N * 10,
        P.PROPOSED: lambda N: (N - 1) * 2 * 2 * 10,
    },
    "delay": {
        P.SHI_ZHONG: lambda N: N,
        P.LIU: lambda N: 2,
        P.SHUKLA: lambda N: N * 2,
        P.SUN1: lambda N: ceil((N - 1) / 2) * 2,
        P.SUN2: lambda N: N,
        P.PROPOSED: lambda N: 2 * 2,
    },
}
