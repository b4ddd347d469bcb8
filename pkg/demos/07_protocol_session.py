"""The wire protocol: a haptic server, a scripted stylus, and a rude client.

The server answers pose requests with quantized script samples and applies
force commands through the device limits. Its loop is non-blocking: a client
that stalls for half the run costs the server no ticks at all.
"""

from hapticsim.forcefield import ForceClass, ForceCommand
from hapticsim.protocol import (
    GetStylusPose,
    HapticServer,
    ScriptSegment,
    SimulationClient,
    StallingClientStub,
    StylusScript,
    VirtualStylusDevice,
    encode,
)

script = StylusScript(
    segments=(ScriptSegment(kind="line", duration=2.0,
                            params={"start": (0, 0, 0), "end": (0.05, 0, 0)}),),
    button_events=((0, "press"),))

print("frame bytes for a pose request:", encode(GetStylusPose()).hex())

device = VirtualStylusDevice(script=script)
server = HapticServer(device, host="127.0.0.1", port=0)
host, port = server.endpoint
print(f"server on {host}:{port}, haptic rate {device.haptic_hz} Hz")

stub = StallingClientStub(host, port, request_period=200, stall_windows=((0.5, 1.5),))
for n in range(2000):          # two simulated seconds
    server.tick(n)
    stub.tick(n)
print(f"server ticks: {server.tick_count} (client stalled 0.5 s..1.5 s)")
print(f"stub requests answered: {stub.replies}/{stub.requests}")

client = SimulationClient(host, port, timeout=2.0)
client.set_force(ForceCommand(force=(9.0, 0, 0), force_class=ForceClass.PENETRATION_PROPORTIONAL))
for n in range(2000, 2010):
    server.tick(n)
print(f"a 9 N remote command served as {device.last_served.magnitude:.1f} N "
      f"(peak clamp {device.spec.peak_force} N)")

client.close()
stub.close()
server.close()
