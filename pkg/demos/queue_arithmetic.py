# Will a router queue overflow while a burst arrives?
import numpy as np

from discopace import queue_analysis as qa

case = qa.QueueAnalysisCase(sent_messages=100, incoming_rate=50, processing_rate=20, queue_size=50)
print("receive time", case.receive_time, "drops?", case.will_drop, "needs", case.min_queue_size)

# smallest window that keeps 100 messages inside a 50 slot queue
print("safe window", qa.safe_receive_time(100, 50, 20))

# sweep queue sizes and processing rates
sizes = np.arange(0, 101, 10)
rates = np.array([0, 10, 20, 40, 80])
grid = np.array([[qa.will_drop(100, 2.0, r, int(q)) for q in sizes] for r in rates])
print("rows: processing rate, cols: queue size (x = drops)")
print("      " + " ".join(f"{q:>3d}" for q in sizes))
for r, row in zip(rates, grid):
    print(f"{r:>5d} " + " ".join("  x" if d else "  ." for d in row))
