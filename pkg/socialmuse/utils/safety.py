### Close trackers and mark the run manifest upon ctrl+c ###
import atexit
import signal
import sys


def setup_safe_exit(manifest=None, tracker=None):
    def signal_handler(sig=None, frame=None):
        print("\nCtrl+C detected. Exiting gracefully...")
        try:
            if manifest is not None:
                manifest.mark("interrupted")
        except Exception:
            pass
        try:
            if tracker is not None:
                tracker.close()
        except Exception:
            pass
        sys.exit(130)

    signal.signal(signal.SIGINT, signal_handler)

    def exit_handler():
        try:
            if tracker is not None:
                tracker.close()
        except Exception:
            pass

    atexit.register(exit_handler)
