import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

VOCAB_SIZE = 10000
MAX_LEN = 200
DATASETS = {
    "imdb": ("data/imdb", "classification", "sequences"),
    "sst2": ("data/sst2", "classification", "sequences"),
}


class LSTMNet(keras.Model):
    """Stacked LSTM text classifier with a residual sum over the first two layers."""

    def __init__(self):
        super().__init__()
        self.embedding = layers.Embedding(VOCAB_SIZE, 128)
        self.lstm1 = layers.LSTM(64, return_sequences=True)
        self.lstm2 = layers.LSTM(64, return_sequences=True)
        self.lstm3 = layers.LSTM(64)
        self.dropout = layers.Dropout(0.3)
        self.classifier = layers.Dense(2, activation="softmax")

    def call(self, inputs):
        x = self.embedding(inputs)
        h1 = self.lstm1(x)
        h2 = self.lstm2(h1)
        merged = h1 + h2
        x = self.lstm3(merged)
        x = self.dropout(x)
        return self.classifier(x)


model = LSTMNet()
model.build((None, MAX_LEN))
model.compile(
    optimizer=keras.optimizers.Adam(learning_rate=0.001),
    loss="sparse_categorical_crossentropy",
    metrics=["accuracy"],
)
model.fit(x_train, y_train, batch_size=64, epochs=10)
