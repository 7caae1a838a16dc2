using System;
using System.Threading.Tasks;

namespace App.Commands
{
    // Handles chunked uploads for the sync client.
    public class UploadCommand
    {
        private readonly ILogger _log;
        private bool _stopped;

        public int ChunkSize { get; set; }

        public UploadCommand(ILogger log)
        {
            _log = log;
            _stopped = false;
        }

        // lifecycle
        public void Start()
        {
            _log.Info("starting");
            _stopped = false;
        }

        public async Task Stop()
        {
            _log.Info("stopping");
            _stopped = true;
            await Task.Delay(10);
        }

        public bool IsStopped() => _stopped;
    }

    internal class RetryPolicy
    {
        public int MaxAttempts = 3;

        public bool ShouldRetry(int attempt)
        {
            return attempt < MaxAttempts;
        }
    }
}
